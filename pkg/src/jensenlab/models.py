"""Function models: structured maps f : X → Y plus deterministic perturbations.

A FunctionModel is a sum of an exact part (linear map, radial quadratic
c·‖x‖², tabulated radial term b(‖x‖²)) and pseudo-random perturbation terms.
Perturbations are pure functions of (seed, bits of x): the coordinate bit
patterns are hashed with FNV-1a (64-bit), the hash seeds a splitmix64 stream
that is expanded to codomain coordinates in [-1, 1), and the resulting vector
is normalized in the *codomain norm* so the declared pointwise bound
(amplitude, δ‖x‖^p, or amplitude/(1+‖x‖)) is exact in the working norm.
Evaluation is bit-identical across runs, platforms, and batch shapes: the
scalar path delegates to the batched kernel.

The generalized Jensen defect measured throughout the lab is

    ‖r·f((s·x + t·y)/r) − s·g(x) − t·h(y)‖   (codomain norm).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .spaces import NormedSpaceSpec, as_batch, as_point, norm_many

NONE = "none"
BOUNDED = "bounded"
POWER = "power"
DECAY = "decay"

_U64 = np.uint64
_FNV_OFFSET = _U64(0xCBF29CE484222325)
_FNV_PRIME = _U64(0x100000001B3)
_SM_GAMMA = _U64(0x9E3779B97F4A7C15)
_SM_MIX1 = _U64(0xBF58476D1CE4E5B9)
_SM_MIX2 = _U64(0x94D049BB133111EB)


class ModelError(ValueError):
    """Raised for malformed model specs."""


@dataclass(frozen=True)
class JensenParams:
    """The positive integer coefficients (r, s, t) of the equation."""

    r: int
    s: int
    t: int

    def __post_init__(self):
        for name in ("r", "s", "t"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ModelError(f"{name} must be a positive integer, got {v!r}")

    def to_dict(self) -> dict:
        return {"r": self.r, "s": self.s, "t": self.t}

    @classmethod
    def from_dict(cls, d: dict) -> "JensenParams":
        return cls(r=d["r"], s=d["s"], t=d["t"])


@dataclass(frozen=True)
class PerturbationSpec:
    """One additive perturbation term with a declared pointwise bound.

    kind      bound on ‖pert(x)‖ in the codomain norm
    -------   ----------------------------------------
    none      0
    bounded   amplitude
    power     delta·‖x‖^p   (p in [0, 1), with 0^p := 0)
    decay     amplitude/(1 + ‖x‖)

    Every kind vanishes exactly at x = 0.
    """

    kind: str = NONE
    amplitude: float = 0.0
    delta: float = 0.0
    p: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in (NONE, BOUNDED, POWER, DECAY):
            raise ModelError(f"unknown perturbation kind {self.kind!r}")
        if self.amplitude < 0.0 or self.delta < 0.0:
            raise ModelError("perturbation magnitudes must be nonnegative")
        if self.kind == POWER and not (0.0 <= self.p < 1.0):
            raise ModelError(f"power perturbation needs p in [0, 1), got {self.p}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "amplitude": self.amplitude,
            "delta": self.delta,
            "p": self.p,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PerturbationSpec":
        return cls(
            kind=d.get("kind", NONE),
            amplitude=d.get("amplitude", 0.0),
            delta=d.get("delta", 0.0),
            p=d.get("p", 0.0),
            seed=d.get("seed", 0),
        )


def _fnv1a_rows(seed: int, X: np.ndarray) -> np.ndarray:
    """FNV-1a 64 over seed bytes then each coordinate's bit pattern, little-endian."""
    bits = np.ascontiguousarray(X, dtype=np.float64).view(_U64)
    n, dim = bits.shape
    h = np.full(n, _FNV_OFFSET, dtype=_U64)
    words = [np.full(n, _U64(seed & 0xFFFFFFFFFFFFFFFF), dtype=_U64)]
    words += [bits[:, j] for j in range(dim)]
    mask = _U64(0xFF)
    for w in words:
        for k in range(8):
            h = (h ^ ((w >> _U64(8 * k)) & mask)) * _FNV_PRIME
    return h


def _splitmix_expand(h: np.ndarray, k: int) -> np.ndarray:
    """Expand per-row hashes to (n, k) pseudo-uniform values in [-1, 1)."""
    out = np.empty((h.shape[0], k), dtype=np.float64)
    state = h.copy()
    for j in range(k):
        state = state + _SM_GAMMA
        z = state.copy()
        z ^= z >> _U64(30)
        z *= _SM_MIX1
        z ^= z >> _U64(27)
        z *= _SM_MIX2
        z ^= z >> _U64(31)
        out[:, j] = (z >> _U64(11)).astype(np.float64) * 2.0**-52 - 1.0
    return out


def perturbation_values(
    spec: PerturbationSpec,
    X: np.ndarray,
    domain: NormedSpaceSpec,
    codomain: NormedSpaceSpec,
) -> np.ndarray:
    """Evaluate one perturbation term on a (n, dim) batch; (n, codim) output."""
    n = X.shape[0]
    if spec.kind == NONE or (spec.kind in (BOUNDED, DECAY) and spec.amplitude == 0.0):
        return np.zeros((n, codomain.dim))
    if spec.kind == POWER and spec.delta == 0.0:
        return np.zeros((n, codomain.dim))

    U = _splitmix_expand(_fnv1a_rows(spec.seed, X), codomain.dim)
    lens = norm_many(codomain, U)
    degenerate = lens == 0.0
    if np.any(degenerate):
        U[degenerate, 0] = 1.0
        lens[degenerate] = 1.0
    U /= lens[:, None]

    nx = norm_many(domain, X)
    if spec.kind == BOUNDED:
        scale = np.full(n, spec.amplitude)
    elif spec.kind == DECAY:
        scale = spec.amplitude / (1.0 + nx)
    else:
        scale = np.where(nx > 0.0, spec.delta * nx**spec.p, 0.0)
    out = U * scale[:, None]
    out[nx == 0.0] = 0.0
    return out


@dataclass(frozen=True, eq=False)
class RadialTable:
    """Piecewise-linear vector-valued map of u = ‖x‖², with edge-slope extrapolation."""

    knots: np.ndarray  # (K,) increasing, >= 0
    values: np.ndarray  # (K, codim)

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        if knots.ndim != 1 or knots.size < 2:
            raise ModelError("radial table needs at least two knots")
        if values.shape[0] != knots.size or values.ndim != 2:
            raise ModelError("radial table values must be (K, codim)")
        if np.any(np.diff(knots) <= 0) or knots[0] < 0.0:
            raise ModelError("radial table knots must be increasing and >= 0")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)

    def eval_many(self, u: np.ndarray) -> np.ndarray:
        idx = np.clip(np.searchsorted(self.knots, u), 1, self.knots.size - 1)
        k0 = self.knots[idx - 1]
        k1 = self.knots[idx]
        w = (u - k0) / (k1 - k0)
        return self.values[idx - 1] + w[:, None] * (self.values[idx] - self.values[idx - 1])

    def to_dict(self) -> dict:
        return {"knots": self.knots.tolist(), "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "RadialTable":
        return cls(knots=np.asarray(d["knots"]), values=np.asarray(d["values"]))


def _coerce_perturbations(perturbations) -> tuple:
    if perturbations is None:
        return ()
    if isinstance(perturbations, PerturbationSpec):
        return (perturbations,)
    return tuple(perturbations)


@dataclass(frozen=True, eq=False)
class FunctionModel:
    """Structured map f(x) = L·x + c·‖x‖² + b(‖x‖²) + Σ perturbations(x).

    fix_origin forces f(0) = 0 exactly (the structured parts already vanish
    there except possibly the radial table).
    """

    domain: NormedSpaceSpec
    codomain: NormedSpaceSpec
    linear: np.ndarray  # (codim, dim)
    quadratic: np.ndarray | None = None  # (codim,) coefficient of ‖x‖²
    radial: RadialTable | None = None
    perturbations: tuple = ()
    fix_origin: bool = True

    def __post_init__(self):
        L = np.asarray(self.linear, dtype=np.float64)
        if L.shape != (self.codomain.dim, self.domain.dim):
            raise ModelError(
                f"linear part must have shape ({self.codomain.dim}, {self.domain.dim}),"
                f" got {L.shape}"
            )
        object.__setattr__(self, "linear", L)
        if self.quadratic is not None:
            q = np.asarray(self.quadratic, dtype=np.float64)
            if q.shape != (self.codomain.dim,):
                raise ModelError(f"quadratic coefficient must have shape ({self.codomain.dim},)")
            object.__setattr__(self, "quadratic", q)
        if self.radial is not None and self.radial.values.shape[1] != self.codomain.dim:
            raise ModelError("radial table codomain dimension mismatch")
        object.__setattr__(self, "perturbations", _coerce_perturbations(self.perturbations))
        for p in self.perturbations:
            if not isinstance(p, PerturbationSpec):
                raise ModelError("perturbations must be PerturbationSpec instances")

    def eval_many(self, X) -> np.ndarray:
        X = as_batch(X, self.domain.dim)
        Y = X @ self.linear.T
        if self.quadratic is not None or self.radial is not None:
            u = norm_many(self.domain, X) ** 2
            if self.quadratic is not None:
                Y = Y + u[:, None] * self.quadratic[None, :]
            if self.radial is not None:
                Y = Y + self.radial.eval_many(u)
        for spec in self.perturbations:
            Y = Y + perturbation_values(spec, X, self.domain, self.codomain)
        if self.fix_origin:
            Y[~np.any(X, axis=1)] = 0.0
        return Y

    def eval(self, x) -> np.ndarray:
        return self.eval_many(as_point(x, self.domain.dim)[None, :])[0]

    def __call__(self, x) -> np.ndarray:
        return self.eval(x)

    def exact_part(self) -> "FunctionModel":
        """The model without its perturbation terms."""
        return FunctionModel(
            domain=self.domain,
            codomain=self.codomain,
            linear=self.linear,
            quadratic=self.quadratic,
            radial=self.radial,
            perturbations=(),
            fix_origin=self.fix_origin,
        )

    def to_dict(self) -> dict:
        return {
            "domain": self.domain.to_dict(),
            "codomain": self.codomain.to_dict(),
            "linear": self.linear.tolist(),
            "quadratic": None if self.quadratic is None else self.quadratic.tolist(),
            "radial": None if self.radial is None else self.radial.to_dict(),
            "perturbations": [p.to_dict() for p in self.perturbations],
            "fix_origin": self.fix_origin,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FunctionModel":
        return cls(
            domain=NormedSpaceSpec.from_dict(d["domain"]),
            codomain=NormedSpaceSpec.from_dict(d["codomain"]),
            linear=np.asarray(d["linear"]),
            quadratic=None if d.get("quadratic") is None else np.asarray(d["quadratic"]),
            radial=None if d.get("radial") is None else RadialTable.from_dict(d["radial"]),
            perturbations=tuple(
                PerturbationSpec.from_dict(p) for p in d.get("perturbations", [])
            ),
            fix_origin=d.get("fix_origin", True),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, s: str) -> "FunctionModel":
        return cls.from_dict(json.loads(s))


def make_perturbed_additive(
    linear,
    domain: NormedSpaceSpec,
    codomain: NormedSpaceSpec,
    perturbations=(),
) -> FunctionModel:
    """Convenience constructor: L·x plus perturbation terms, origin fixed."""
    return FunctionModel(
        domain=domain,
        codomain=codomain,
        linear=np.asarray(linear, dtype=np.float64),
        perturbations=_coerce_perturbations(perturbations),
    )


class _Wrapped:
    """Base for derived evaluable maps; exposes the FunctionModel eval protocol."""

    def __init__(self, base):
        self.base = base
        self.domain = base.domain
        self.codomain = base.codomain

    def eval(self, x):
        return self.eval_many(as_point(x, self.domain.dim)[None, :])[0]

    def __call__(self, x):
        return self.eval(x)


class OddPart(_Wrapped):
    """x ↦ (f(x) − f(−x))/2.

    For structured models the even exact terms (quadratic, radial table) are
    dropped analytically instead of being cancelled numerically; otherwise
    their roundoff, amplified by scaling iterations, would swamp deep limits.
    """

    def __init__(self, base):
        super().__init__(base)
        self._structured = isinstance(base, FunctionModel)

    def eval_many(self, X):
        X = as_batch(X, self.domain.dim)
        if self._structured:
            Y = X @ self.base.linear.T
            for spec in self.base.perturbations:
                Y = Y + 0.5 * (
                    perturbation_values(spec, X, self.domain, self.codomain)
                    - perturbation_values(spec, -X, self.domain, self.codomain)
                )
            if self.base.fix_origin:
                Y[~np.any(X, axis=1)] = 0.0
            return Y
        return (self.base.eval_many(X) - self.base.eval_many(-X)) / 2.0


class EvenPart(_Wrapped):
    """x ↦ (f(x) + f(−x))/2; structured models keep their even exact terms directly."""

    def __init__(self, base):
        super().__init__(base)
        self._structured = isinstance(base, FunctionModel)

    def eval_many(self, X):
        X = as_batch(X, self.domain.dim)
        if self._structured:
            Y = np.zeros((X.shape[0], self.codomain.dim))
            if self.base.quadratic is not None or self.base.radial is not None:
                u = norm_many(self.domain, X) ** 2
                if self.base.quadratic is not None:
                    Y = Y + u[:, None] * self.base.quadratic[None, :]
                if self.base.radial is not None:
                    Y = Y + self.base.radial.eval_many(u)
            for spec in self.base.perturbations:
                Y = Y + 0.5 * (
                    perturbation_values(spec, X, self.domain, self.codomain)
                    + perturbation_values(spec, -X, self.domain, self.codomain)
                )
            if self.base.fix_origin:
                Y[~np.any(X, axis=1)] = 0.0
            return Y
        return (self.base.eval_many(X) + self.base.eval_many(-X)) / 2.0


class ScaledModel(_Wrapped):
    """x ↦ out_scale · base(arg_scale · x)."""

    def __init__(self, base, arg_scale: float, out_scale: float = 1.0):
        super().__init__(base)
        self.arg_scale = float(arg_scale)
        self.out_scale = float(out_scale)

    def eval_many(self, X):
        X = as_batch(X, self.domain.dim)
        return self.out_scale * self.base.eval_many(self.arg_scale * X)


def odd_even_split(f) -> tuple:
    """Split f into (odd, even) parts; f = odd + even holds exactly pointwise."""
    return OddPart(f), EvenPart(f)


def jensen_defect_many(f, g, h, params: JensenParams, X, Y) -> np.ndarray:
    """Row-wise defect ‖r·f((s·x + t·y)/r) − s·g(x) − t·h(y)‖ for pair batches."""
    X = as_batch(X, f.domain.dim)
    Y = as_batch(Y, f.domain.dim)
    if f.codomain != g.codomain or f.codomain != h.codomain:
        raise ModelError("f, g, h must share a codomain")
    mid = (params.s * X + params.t * Y) / params.r
    vals = (
        params.r * f.eval_many(mid)
        - params.s * g.eval_many(X)
        - params.t * h.eval_many(Y)
    )
    return norm_many(f.codomain, vals)


def jensen_defect(f, g, h, params: JensenParams, x, y) -> float:
    x = as_point(x, f.domain.dim)
    y = as_point(y, f.domain.dim)
    return float(jensen_defect_many(f, g, h, params, x[None, :], y[None, :])[0])


def derive_seed(seed: int, index: int) -> int:
    """Deterministic sub-seed stream (splitmix64 of seed advanced index+1 times)."""
    mask = 0xFFFFFFFFFFFFFFFF
    state = seed & mask
    for _ in range(index + 1):
        state = (state + int(_SM_GAMMA)) & mask
    z = state
    z = ((z ^ (z >> 30)) * int(_SM_MIX1)) & mask
    z = ((z ^ (z >> 27)) * int(_SM_MIX2)) & mask
    return z ^ (z >> 31)
