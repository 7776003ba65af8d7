import numpy as np
import pytest

from jensenlab.control import (
    ControlError,
    ControlFunctionSpec,
    RadialControlTable,
    control_phi_norms,
)
from jensenlab.models import (
    BOUNDED,
    FunctionModel,
    JensenParams,
    PerturbationSpec,
)
from jensenlab.series import (
    cauchy_gap,
    cor22_bound,
    dyadic_limit,
    dyadic_limit_many,
    pexider_triadic_limit_many,
    phi_tilde_dyadic,
    phi_tilde_triadic,
    psi_eval,
    quadratic_limit_many,
    triadic_limit_many,
)
from jensenlab.spaces import euclidean_space, norm_many

E3 = euclidean_space(3)
E2 = euclidean_space(2)
UNIT_X = np.array([1.0, 0.0, 0.0])
UNIT_Y = np.array([0.0, 1.0, 0.0])


def _brute_phi_tilde_dyadic(spec, params, nx, ny, terms=400):
    r, s, t = params.r, params.s, params.t
    total = 0.0
    for n in range(terms):
        ax = np.array([2.0**n * (r / s) * nx])
        ay = np.array([2.0**n * (r / t) * ny])
        zero = np.array([0.0])
        total += 2.0**-n * float(
            control_phi_norms(spec, ax, ay)[0]
            + control_phi_norms(spec, ax, zero)[0]
            + control_phi_norms(spec, zero, ay)[0]
        )
    return total / (2.0 * r)


class TestClosedForms:
    def test_dyadic_constant(self):
        spec = ControlFunctionSpec(kind="constant", epsilon=1.0)
        sv = phi_tilde_dyadic(spec, E3, JensenParams(2, 1, 1), UNIT_X, UNIT_Y)
        assert sv.exact
        assert sv.tail_bound == 0.0
        assert sv.value == pytest.approx(1.5, rel=1e-14)
        # 3 eps / r regardless of the argument
        sv2 = phi_tilde_dyadic(spec, E3, JensenParams(5, 2, 3), 7.0 * UNIT_X, 0.1 * UNIT_Y)
        assert sv2.value == pytest.approx(3.0 / 5.0, rel=1e-14)

    def test_dyadic_mixed_reference_value(self):
        spec = ControlFunctionSpec(kind="mixed", epsilon=1.0, delta=1.0, p=0.5)
        sv = phi_tilde_dyadic(spec, E3, JensenParams(1, 1, 1), UNIT_X, UNIT_Y)
        assert sv.value == pytest.approx(3.0 + 2.0 / (1.0 - 2.0**-0.5), rel=1e-12)
        assert sv.value == pytest.approx(9.828427124746192, rel=1e-12)

    def test_dyadic_matches_partial_sums(self):
        spec = ControlFunctionSpec(kind="mixed", epsilon=0.3, delta=0.7, p=0.75)
        params = JensenParams(2, 3, 1)
        sv = phi_tilde_dyadic(spec, E3, params, 1.3 * UNIT_X, 0.4 * UNIT_Y)
        assert sv.value == pytest.approx(
            _brute_phi_tilde_dyadic(spec, params, 1.3, 0.4), rel=1e-12
        )

    def test_cor22_reference_value(self):
        spec_args = dict(epsilon=1.0, delta=1.0, p=0.5)
        val = cor22_bound(JensenParams(1, 1, 1), space=E3, x=UNIT_X, **spec_args)
        assert val == pytest.approx(3.0 + 4.0 / (1.0 - 2.0**-0.5), rel=1e-12)
        assert val == pytest.approx(16.656854249492383, rel=1e-12)

    def test_cor22_dominates_phi_tilde(self):
        params = JensenParams(3, 2, 1)
        spec = ControlFunctionSpec(kind="mixed", epsilon=0.2, delta=0.5, p=0.25)
        for radius in (0.3, 1.0, 4.7):
            x = radius * UNIT_X
            tilde = phi_tilde_dyadic(spec, E3, params, x, x)
            bound = cor22_bound(params, 0.2, 0.5, 0.25, E3, x)
            assert bound >= tilde.value * (1.0 - 1e-12)

    def test_psi_values(self):
        const = ControlFunctionSpec(kind="constant", epsilon=0.6)
        assert psi_eval(const, E3, 3.3 * UNIT_X) == pytest.approx(1.2, rel=1e-12)
        mixed = ControlFunctionSpec(kind="mixed", epsilon=1.0, delta=1.0, p=0.5)
        expect = 2.0 + 2.0 * (np.sqrt(1.5) + np.sqrt(0.5))
        assert psi_eval(mixed, E3, UNIT_X) == pytest.approx(expect, rel=1e-12)
        assert psi_eval(mixed, E3, UNIT_X) == pytest.approx(5.863703305156273, rel=1e-12)

    def test_triadic_constant(self):
        spec = ControlFunctionSpec(kind="constant", epsilon=0.9)
        sv = phi_tilde_triadic(spec, E3, UNIT_X, 2.0 * UNIT_Y)
        assert sv.exact
        assert sv.value == pytest.approx(2.7, rel=1e-14)

    def test_triadic_mixed_closed_form(self):
        eps, delta, p = 0.2, 0.6, 0.25
        spec = ControlFunctionSpec(kind="mixed", epsilon=eps, delta=delta, p=p)
        nx, ny = 1.1, 0.7
        sv = phi_tilde_triadic(spec, E3, nx * UNIT_X, ny * UNIT_Y)
        closed = 3.0 * eps + (2.0 / 3.0) * delta * 2.0**-p * (
            (2.0 * 3.0**p + 1.0) * nx**p + (3.0**p + 2.0) * ny**p
        ) / (1.0 - 3.0 ** (p - 1.0))
        assert sv.value == pytest.approx(closed, rel=1e-12)

    def test_triadic_diagonal_is_psi_series(self):
        spec = ControlFunctionSpec(kind="mixed", epsilon=0.45, delta=0.2, p=0.5)
        x = np.array([0.9, 0.1, 0.0])
        sv = phi_tilde_triadic(spec, E3, x, x)
        brute = sum(3.0**-k * psi_eval(spec, E3, 3.0**k * x) for k in range(60))
        assert sv.value == pytest.approx(brute, rel=1e-12)

    def test_table_control_series(self):
        """A constant-valued table reproduces the constant closed form via its tail."""
        c = 0.5
        table = RadialControlTable(radii=[0.0, 100.0], values=[c, c], q=0.0)
        spec = ControlFunctionSpec(kind="table", table=table)
        sv = phi_tilde_dyadic(spec, E3, JensenParams(2, 1, 1), UNIT_X, UNIT_Y)
        assert not sv.exact
        assert sv.tail_bound > 0.0
        assert sv.value <= sv.upper
        assert sv.upper == pytest.approx(6.0 * c / 2.0, rel=1e-12)

    def test_control_validation(self):
        with pytest.raises(ControlError):
            ControlFunctionSpec(kind="mixed", epsilon=1.0, delta=1.0, p=1.0)
        with pytest.raises(ControlError):
            ControlFunctionSpec(kind="constant", epsilon=-0.1)
        with pytest.raises(ControlError):
            RadialControlTable(radii=[0.5, 1.0], values=[1.0, 1.0], q=0.0)


L23 = np.array([[1.0, -0.5, 2.0], [0.0, 1.0, 1.0]])


def _additive(perts=()):
    return FunctionModel(domain=E3, codomain=E2, linear=L23, perturbations=perts)


def _quadratic(c=(1.0, -0.5)):
    return FunctionModel(domain=E3, codomain=E2, linear=np.zeros((2, 3)), quadratic=c)


class TestLimits:
    def test_dyadic_recovers_linear_exactly(self):
        f = _additive()
        X = np.random.default_rng(0).uniform(-3.0, 3.0, size=(30, 3))
        values, iterations, gaps, converged = dyadic_limit_many(f, X)
        assert np.all(converged)
        err = norm_many(E2, values - X @ L23.T)
        assert np.max(err) <= 1e-10

    def test_dyadic_error_bound_under_bounded_noise(self):
        amp = 0.25
        f = _additive((PerturbationSpec(kind=BOUNDED, amplitude=amp, seed=3),))
        X = np.random.default_rng(1).uniform(-3.0, 3.0, size=(40, 3))
        values, iterations, gaps, converged = dyadic_limit_many(f, X, tol=1e-10)
        assert np.all(converged)
        err = norm_many(E2, values - X @ L23.T)
        # ‖2^-n f(2^n x) - Lx‖ = 2^-n ‖pert(2^n x)‖ <= amp·2^-n
        assert np.all(err <= amp * 2.0 ** (-iterations.astype(float)) * (1.0 + 1e-9) + 1e-15)

    def test_dyadic_diverges_on_quadratic(self):
        f = _quadratic()
        X = np.random.default_rng(2).uniform(0.5, 2.0, size=(10, 3))
        values, iterations, gaps, converged = dyadic_limit_many(f, X, n_max=30)
        assert not np.any(converged)
        assert np.all(np.isfinite(gaps))

    def test_quadratic_limit_recovers_quadratic(self):
        f = _quadratic((0.7, 0.2))
        X = np.random.default_rng(3).uniform(-2.0, 2.0, size=(25, 3))
        values, iterations, gaps, converged = quadratic_limit_many(f, X)
        assert np.all(converged)
        u = norm_many(E3, X) ** 2
        assert np.allclose(values, u[:, None] * np.array([0.7, 0.2]), rtol=1e-10, atol=1e-12)

    def test_quadratic_limit_kills_linear_part(self):
        f = _additive()
        X = np.random.default_rng(4).uniform(-2.0, 2.0, size=(15, 3))
        values, _, _, converged = quadratic_limit_many(f, X, tol=1e-9)
        assert np.all(converged)
        assert np.max(norm_many(E2, values)) <= 1e-8

    def test_triadic_recovers_linear(self):
        f = _additive()
        X = np.random.default_rng(5).uniform(-3.0, 3.0, size=(20, 3))
        values, _, _, converged = triadic_limit_many(f, X)
        assert np.all(converged)
        assert np.max(norm_many(E2, values - X @ L23.T)) <= 1e-10

    def test_pexider_limit_recovers_linear(self):
        f = _additive((PerturbationSpec(kind=BOUNDED, amplitude=0.1, seed=8),))
        params = JensenParams(3, 2, 2)
        X = np.random.default_rng(6).uniform(-2.0, 2.0, size=(20, 3))
        values, _, _, converged = pexider_triadic_limit_many(f, params, X, n_max=40)
        assert np.all(converged)
        assert np.max(norm_many(E2, values - X @ L23.T)) <= 1e-8

    def test_scalar_wrapper(self):
        est = dyadic_limit(_additive(), np.array([1.0, 2.0, -1.0]))
        assert est.converged
        assert est.value.shape == (2,)
        assert est.last_gap <= 1e-9

    @pytest.mark.parametrize(
        "base,factor", [(2.0, 1.5), (3.0, 4.0 / 3.0), (4.0, 5.0 / 4.0)]
    )
    def test_successive_gap_bounds(self, base, factor):
        """With amplitude-a noise the step-n gap is at most factor·a·base^-n."""
        amp = 0.5
        f = _additive((PerturbationSpec(kind=BOUNDED, amplitude=amp, seed=11),))
        x = np.array([1.2, -0.3, 0.8])
        for n in range(0, 12, 3):
            gap = cauchy_gap(f, x, base, n, n + 1)
            assert gap <= factor * amp * base ** (-n) * (1.0 + 1e-12) + 1e-15
