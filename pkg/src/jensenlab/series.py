"""Comparison series and direct-method limits.

Two families of objects live here.

Series: the dyadic comparison series

    φ~(x, y) = (1/2r) Σ_{n≥0} 2^{-n} [ φ(2^n (r/s)x, 2^n (r/t)y)
                                      + φ(2^n (r/s)x, 0) + φ(0, 2^n (r/t)y) ]

its closed forms for constant and mixed controls, the matching single-variable
bound cor22_bound, and the triadic analogue built from the five-term
combination ψ.  Constant control gives φ~ = 3ε/r (dyadic) and 3ε (triadic).

Limits: the scaling iterations a_n = gain^n · f(arg^n · x) behind the direct
method (dyadic arg 2 / gain 1/2, triadic arg 3 / gain 1/3, quadratic arg 2 /
gain 1/4), with successive-gap convergence detection.  Divergence is reported
through the converged flag, never raised.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .control import CONSTANT, MIXED, ControlError, ControlFunctionSpec, control_phi_norms
from .models import JensenParams, ScaledModel
from .spaces import NormedSpaceSpec, as_batch, as_point, norm, norm_many

DYADIC_N_MAX = 40
TRIADIC_N_MAX = 25
DEFAULT_TOL = 1e-9
_SERIES_HARD_CAP = 4096
_OVERFLOW_LIMIT = 1e120


@dataclass
class SeriesValue:
    """A series evaluation: closed form (exact) or truncation plus tail bound."""

    value: float
    terms_used: int
    tail_bound: float
    exact: bool

    @property
    def upper(self) -> float:
        return self.value + self.tail_bound


@dataclass
class LimitEstimate:
    value: np.ndarray
    iterations: int
    last_gap: float
    converged: bool


def _powered(v: float, p: float) -> float:
    return v**p if v > 0.0 else 0.0


def phi_tilde_dyadic(
    spec: ControlFunctionSpec,
    space: NormedSpaceSpec,
    params: JensenParams,
    x,
    y,
) -> SeriesValue:
    """Evaluate the dyadic comparison series φ~(x, y).

    Constant and mixed controls sum in closed form; table controls are
    truncated once every scaled argument is in the power-law regime, where the
    remainder is geometric with ratio 2^(q-1) and summed exactly.
    """
    r, s, t = params.r, params.s, params.t
    nx = norm(space, x)
    ny = norm(space, y)
    a = (r / s) * nx
    b = (r / t) * ny
    if spec.kind == CONSTANT:
        return SeriesValue(3.0 * spec.epsilon / r, 0, 0.0, True)
    if spec.kind == MIXED:
        geo = 1.0 / (1.0 - 2.0 ** (spec.p - 1.0))
        power = (spec.delta / r) * (_powered(a, spec.p) + _powered(b, spec.p)) * geo
        return SeriesValue(3.0 * spec.epsilon / r + power, 0, 0.0, True)
    return _table_series(
        spec,
        scaled_args=[(2.0, a), (2.0, b)],
        const_count=2,
        prefactor=1.0 / (2.0 * r),
        ratio_base=2.0,
        const_geo=2.0,  # Σ 2^-k = 2
    )


def cor22_bound(
    params: JensenParams,
    epsilon: float,
    delta: float,
    p: float,
    space: NormedSpaceSpec,
    x,
) -> float:
    """Single-variable mixed-control bound (3/r)ε + (2δ‖x‖^p / r(1−2^{p−1}))·[(r/s)^p + (r/t)^p].

    This dominates φ~(x, x) for the same ε, δ, p (it is loose by a factor of
    two in the power part).
    """
    if not (0.0 <= p < 1.0):
        raise ControlError(f"bound needs p in [0, 1), got {p}")
    r, s, t = params.r, params.s, params.t
    nx = norm(space, x)
    geo = 1.0 / (1.0 - 2.0 ** (p - 1.0))
    coeff = ((r / s) ** p + (r / t) ** p) * 2.0 * delta * geo / r
    return 3.0 * epsilon / r + coeff * _powered(nx, p)


def psi_eval(spec: ControlFunctionSpec, space: NormedSpaceSpec, x) -> float:
    """Five-term combination driving the triadic iteration:

    ψ(x) = (2/3)φ(3x/2, −x/2) + (1/3)[φ(3x/2, 3x/2) + φ(3x/2, −3x/2)
                                      + φ(x/2, x/2) + φ(x/2, −x/2)].
    """
    nx = norm(space, x)
    hi = 1.5 * nx
    lo = 0.5 * nx
    phis = control_phi_norms(
        spec,
        np.asarray([hi, hi, hi, lo, lo]),
        np.asarray([lo, hi, hi, lo, lo]),
    )
    weights = np.asarray([2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0])
    return float(np.dot(weights, phis))


def phi_tilde_triadic(
    spec: ControlFunctionSpec,
    space: NormedSpaceSpec,
    x,
    y,
) -> SeriesValue:
    """Triadic comparison series

    (2/3) Σ_{n≥0} 3^{-n} [ φ(A_n x, −B_n y) + ½φ(A_n x, ±A_n y) + ½φ(B_n x, ±B_n y) ]

    with A_n = 3^{n+1}/2, B_n = 3^n/2 (both sign choices appear with weight ½).
    Satisfies φ~(x, x) = Σ 3^{-k} ψ(3^k x), and equals 3ε for constant ε.
    """
    nx = norm(space, x)
    ny = norm(space, y)
    if spec.kind == CONSTANT:
        return SeriesValue(3.0 * spec.epsilon, 0, 0.0, True)
    if spec.kind == MIXED:
        p = spec.p
        geo = 2.0**-p / (1.0 - 3.0 ** (p - 1.0))
        power = (
            (2.0 / 3.0)
            * spec.delta
            * geo
            * ((2.0 * 3.0**p + 1.0) * _powered(nx, p) + (3.0**p + 2.0) * _powered(ny, p))
        )
        return SeriesValue(3.0 * spec.epsilon + power, 0, 0.0, True)
    # Norm-form bracket: 2w(A_n nx) + w(B_n nx) + w(A_n ny) + 2w(B_n ny).
    return _table_series(
        spec,
        scaled_args=[(2.0, 1.5 * nx), (1.0, 0.5 * nx), (1.0, 1.5 * ny), (2.0, 0.5 * ny)],
        const_count=0,
        prefactor=2.0 / 3.0,
        ratio_base=3.0,
        const_geo=1.5,  # Σ 3^-k
    )


def _table_series(spec, scaled_args, const_count, prefactor, ratio_base, const_geo):
    """Truncate Σ prefactor·base^{-n}·[Σ coef·w(arg·base^n) + const_count·w(0)]."""
    table = spec.table
    w0 = float(table.eval_many(np.asarray([0.0]))[0])
    const_sum = const_count * w0
    scaling = [(coef, arg) for coef, arg in scaled_args if arg > 0.0]
    const_sum += sum(coef for coef, arg in scaled_args if arg == 0.0) * w0

    rmax = table.radii[-1]
    if scaling:
        smallest = min(arg for _, arg in scaling)
        n_stop = max(8, int(np.ceil(np.log(rmax / smallest) / np.log(ratio_base))) + 1)
    else:
        n_stop = 8
    if n_stop > _SERIES_HARD_CAP:
        raise ControlError("table series truncation exceeds the hard cap")

    total = 0.0
    for n in range(n_stop):
        scale = ratio_base**n
        bracket = const_sum
        for coef, arg in scaling:
            bracket += coef * float(table.eval_many(np.asarray([arg * scale]))[0])
        total += prefactor * bracket / scale
    # Beyond n_stop every scaled argument is in the power-law regime, so the
    # scaling part is geometric with ratio base^(q-1); the w(0) part with base^-1.
    scale = ratio_base**n_stop
    s_tail = 0.0
    for coef, arg in scaling:
        s_tail += coef * float(table.eval_many(np.asarray([arg * scale]))[0])
    geo = 1.0 / (1.0 - ratio_base ** (table.q - 1.0))
    tail = prefactor * (s_tail * geo + const_sum * const_geo) / scale
    return SeriesValue(total, n_stop, tail, False)


def power_limit_many(
    f,
    X,
    arg_factor: float,
    gain: float,
    n_max: int,
    tol: float = DEFAULT_TOL,
    n_start=None,
):
    """Iterate a_n(x) = gain^n · f(arg_factor^n · x) until the successive gap
    (codomain norm) drops to tol, the exponent reaches n_max, or the scaled
    argument overflows.  Per-point bookkeeping; returns (values, iterations,
    last_gap, converged) arrays.
    """
    X = as_batch(X, f.domain.dim)
    n_pts = X.shape[0]
    if n_start is None:
        n_vec = np.zeros(n_pts, dtype=np.int64)
    else:
        n_vec = np.asarray(n_start, dtype=np.int64).copy()
        if n_vec.shape != (n_pts,):
            raise ValueError("n_start must have one entry per point")

    def step_values(idx, n_at):
        scale = np.float64(arg_factor) ** n_at.astype(np.float64)
        g = np.float64(gain) ** n_at.astype(np.float64)
        return g[:, None] * f.eval_many(scale[:, None] * X[idx])

    values = step_values(np.arange(n_pts), n_vec)
    iterations = n_vec.copy()
    last_gap = np.full(n_pts, np.inf)
    converged = np.zeros(n_pts, dtype=bool)
    active = np.ones(n_pts, dtype=bool)

    row_scale = np.max(np.abs(X), axis=1)
    while np.any(active):
        idx = np.flatnonzero(active)
        n_next = n_vec[idx] + 1
        can = n_next <= n_max
        active[idx[~can]] = False
        idx = idx[can]
        n_next = n_next[can]
        if idx.size == 0:
            break
        overflow = (
            row_scale[idx] * np.abs(arg_factor) ** n_next > _OVERFLOW_LIMIT
        ) | (np.abs(gain) ** n_next.astype(np.float64) > _OVERFLOW_LIMIT)
        if np.any(overflow):
            active[idx[overflow]] = False
            idx = idx[~overflow]
            n_next = n_next[~overflow]
            if idx.size == 0:
                continue
        new_vals = step_values(idx, n_next)
        gaps = norm_many(f.codomain, new_vals - values[idx])
        values[idx] = new_vals
        iterations[idx] = n_next
        last_gap[idx] = gaps
        done = gaps <= tol
        finite = np.all(np.isfinite(new_vals), axis=1)
        converged[idx] = done & finite
        active[idx] = ~done & finite
        n_vec[idx] = n_next

    return values, iterations, last_gap, converged


def _scalar_limit(f, x, arg_factor, gain, n_max, tol) -> LimitEstimate:
    x = as_point(x, f.domain.dim)
    v, it, gap, conv = power_limit_many(
        f, x[None, :], arg_factor, gain, n_max=n_max, tol=tol
    )
    return LimitEstimate(
        value=v[0], iterations=int(it[0]), last_gap=float(gap[0]), converged=bool(conv[0])
    )


def dyadic_limit(f, x, n_max: int = DYADIC_N_MAX, tol: float = DEFAULT_TOL) -> LimitEstimate:
    """lim 2^{-n} f(2^n x); recovers the additive part of a perturbed model."""
    return _scalar_limit(f, x, 2.0, 0.5, n_max, tol)


def triadic_limit(f, x, n_max: int = TRIADIC_N_MAX, tol: float = DEFAULT_TOL) -> LimitEstimate:
    """lim 3^{-n} f(3^n x)."""
    return _scalar_limit(f, x, 3.0, 1.0 / 3.0, n_max, tol)


def quadratic_limit(f, x, n_max: int = DYADIC_N_MAX, tol: float = DEFAULT_TOL) -> LimitEstimate:
    """lim 4^{-n} f(2^n x); recovers the ‖·‖²-homogeneous part of an even model."""
    return _scalar_limit(f, x, 2.0, 0.25, n_max, tol)


def dyadic_limit_many(f, X, n_max: int = DYADIC_N_MAX, tol: float = DEFAULT_TOL):
    return power_limit_many(f, X, 2.0, 0.5, n_max, tol)


def triadic_limit_many(f, X, n_max: int = TRIADIC_N_MAX, tol: float = DEFAULT_TOL):
    return power_limit_many(f, X, 3.0, 1.0 / 3.0, n_max, tol)


def quadratic_limit_many(f, X, n_max: int = DYADIC_N_MAX, tol: float = DEFAULT_TOL):
    return power_limit_many(f, X, 2.0, 0.25, n_max, tol)


def pexider_triadic_limit_many(
    f, params: JensenParams, X, n_max: int = TRIADIC_N_MAX, tol: float = DEFAULT_TOL
):
    """Additive approximant A(x) = (1/s)·lim 3^{-n}·r·f(3^n (s/r) x) as arrays."""
    reduced = ScaledModel(f, arg_scale=params.s / params.r, out_scale=params.r / params.s)
    return power_limit_many(reduced, X, 3.0, 1.0 / 3.0, n_max, tol)


def cauchy_gap(f, x, base: float, m: int, n: int) -> float:
    """‖base^{-n} f(base^n x) − base^{-m} f(base^m x)‖ in the codomain norm."""
    x = as_point(x, f.domain.dim)
    vn = float(base) ** (-n) * f.eval_many((float(base) ** n * x)[None, :])[0]
    vm = float(base) ** (-m) * f.eval_many((float(base) ** m * x)[None, :])[0]
    return float(norm_many(f.codomain, (vn - vm)[None, :])[0])
