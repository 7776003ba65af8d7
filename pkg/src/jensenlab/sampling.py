"""Deterministic samplers for points, pairs, and orthogonal pairs.

All randomness flows from an explicit integer seed through labeled
SeedSequence streams, so every sampler is reproducible across runs given the
same (seed, label).  Directions are Gaussian draws normalized in the space's
own norm, so sampled radii are exact in that norm.
"""

from __future__ import annotations

import zlib

import numpy as np

from .spaces import (
    INNER_PRODUCT,
    TRIVIAL,
    NormedSpaceSpec,
    OrthogonalityRelation,
    is_orthogonal,
    norm_many,
)


def rng_from(seed: int, label: str) -> np.random.Generator:
    entropy = [seed & (2**64 - 1), zlib.crc32(label.encode("ascii"))]
    return np.random.default_rng(np.random.SeedSequence(entropy=entropy))


def unit_directions(space: NormedSpaceSpec, n: int, rng) -> np.ndarray:
    V = rng.standard_normal((n, space.dim))
    lens = norm_many(space, V)
    bad = lens == 0.0
    if np.any(bad):
        V[bad] = 0.0
        V[bad, 0] = 1.0
        lens[bad] = norm_many(space, V[bad])
    return V / lens[:, None]


def sample_points(space, n, radius_range, rng) -> np.ndarray:
    lo, hi = radius_range
    radii = rng.uniform(lo, hi, size=n)
    return unit_directions(space, n, rng) * radii[:, None]


def _apply_axis_rows(X, Y, axis_period):
    """Zero out x or y on a periodic subset so axis pairs (x, 0), (0, y) are covered."""
    if axis_period and axis_period > 1:
        idx = np.arange(X.shape[0])
        Y[idx % axis_period == 0] = 0.0
        X[idx % axis_period == axis_period // 2] = 0.0
    return X, Y


def sample_pairs(space, n, radius_range, rng, axis_period: int = 0):
    X = sample_points(space, n, radius_range, rng)
    Y = sample_points(space, n, radius_range, rng)
    return _apply_axis_rows(X, Y, axis_period)


def punctured_pairs(space, n, radius_range, rng):
    lo, hi = radius_range
    if not (lo > 0.0):
        raise ValueError("punctured sampling needs a positive lower radius")
    return sample_pairs(space, n, radius_range, rng, axis_period=0)


def interior_pairs(space, d, n, rng):
    """Pairs with ‖x‖ + ‖y‖ < d: total radius uniform in (0, d), split uniformly."""
    total = rng.uniform(0.0, d, size=n) * (1.0 - 1e-12)
    frac = rng.uniform(0.0, 1.0, size=n)
    rx = total * frac
    ry = total * (1.0 - frac)
    X = unit_directions(space, n, rng) * rx[:, None]
    Y = unit_directions(space, n, rng) * ry[:, None]
    return X, Y


def exterior_pairs(space, d, n, radius_range, rng, axis_period: int = 0):
    """Pairs with ‖x‖ + ‖y‖ ≥ d, radii drawn from radius_range then repaired."""
    lo, hi = radius_range
    rx = rng.uniform(lo, hi, size=n)
    ry = rng.uniform(lo, hi, size=n)
    short = rx + ry < d
    if np.any(short):
        # Rescale deficient rows onto the boundary shell and a bit beyond.
        need = d * (1.0 + 1e-9) / np.maximum(rx[short] + ry[short], 1e-300)
        rx[short] *= need
        ry[short] *= need
    X = unit_directions(space, n, rng) * rx[:, None]
    Y = unit_directions(space, n, rng) * ry[:, None]
    if axis_period and axis_period > 1:
        idx = np.arange(n)
        pick_y = (idx % axis_period == 0) & (rx >= d)
        Y[pick_y] = 0.0
        pick_x = (idx % axis_period == axis_period // 2) & (ry >= d)
        X[pick_x] = 0.0
    return X, Y


def shell_pairs(space, lo, hi, n, rng):
    """Pairs with ‖x‖ + ‖y‖ in [lo, hi)."""
    total = rng.uniform(lo, hi, size=n) * (1.0 - 1e-12)
    frac = rng.uniform(0.0, 1.0, size=n)
    X = unit_directions(space, n, rng) * (total * frac)[:, None]
    Y = unit_directions(space, n, rng) * (total * (1.0 - frac))[:, None]
    return X, Y


def orthogonal_pairs(
    rel: OrthogonalityRelation,
    space: NormedSpaceSpec,
    n: int,
    radius_range,
    rng,
    axis_period: int = 0,
):
    """Pairs that satisfy the relation, radii from radius_range.

    Inner-product relations construct y in the orthogonal complement of x
    (vectorized); the trivial and Birkhoff-James kinds draw candidates and
    keep relation-verified ones, falling back to per-row repair.
    """
    X = sample_points(space, n, radius_range, rng)
    if rel.kind == INNER_PRODUCT:
        lens = np.linalg.norm(X, axis=1)
        safe = np.where(lens > 0.0, lens, 1.0)
        Xhat = X / safe[:, None]
        V = rng.standard_normal((n, space.dim))
        Yd = V - np.einsum("ij,ij->i", V, Xhat)[:, None] * Xhat
        ylen = np.linalg.norm(Yd, axis=1)
        thin = ylen < 1e-12
        if np.any(thin):
            # x swallowed the draw; use the basis direction least aligned with x.
            k = np.argmin(np.abs(Xhat[thin]), axis=1)
            E = np.zeros((int(np.count_nonzero(thin)), space.dim))
            E[np.arange(E.shape[0]), k] = 1.0
            Yd[thin] = E - np.einsum("ij,ij->i", E, Xhat[thin])[:, None] * Xhat[thin]
            ylen[thin] = np.linalg.norm(Yd[thin], axis=1)
        Y = Yd / ylen[:, None] * rng.uniform(*radius_range, size=n)[:, None]
        return _apply_axis_rows(X, Y, axis_period)

    Y = np.empty_like(X)
    radii = rng.uniform(*radius_range, size=n)
    for i in range(n):
        Y[i] = _relation_partner(rel, space, X[i], radii[i], rng)
    return _apply_axis_rows(X, Y, axis_period)


def _relation_partner(rel, space, x, radius, rng, tries: int = 128):
    from .spaces import _norming_functional  # shared supporting-functional helper

    x_zero = not np.any(x)
    for _ in range(tries):
        v = rng.standard_normal(space.dim)
        if rel.kind == TRIVIAL or x_zero:
            y = v
        else:
            g = _norming_functional(space, x)
            gx = float(np.dot(g, x))
            if gx == 0.0:
                continue
            y = v - (float(np.dot(g, v)) / gx) * x
        ny = norm_many(space, y[None, :])[0]
        if ny < 1e-12:
            continue
        y = y / ny * radius
        if is_orthogonal(rel, space, x, y):
            return y
    raise RuntimeError("could not construct an orthogonal partner")
