import math

import mpmath
import numpy as np
import pytest

from hopfdde.errors import DomainError
from hopfdde.model import REFERENCE_PARAMS, ModelParams, State, hill, hill_derivs, linear_matrices, rhs
from oracles import hill_fd


def mp_derivs(x, a, n):
    """Central differences in 50-digit arithmetic."""
    with mpmath.workdps(50):
        f = lambda t: t**n / (a + t**n)  # noqa: E731
        h = mpmath.mpf("1e-12")
        X = mpmath.mpf(x)
        d1 = (f(X + h) - f(X - h)) / (2 * h)
        d2 = (f(X + h) - 2 * f(X) + f(X - h)) / h**2
        d3 = (f(X + 2 * h) - 2 * f(X + h) + 2 * f(X - h) - f(X - 2 * h)) / (2 * h**3)
        return float(d1), float(d2), float(d3)


class TestParams:
    def test_defaults_are_reference(self):
        p = ModelParams()
        assert (p.a1, p.a2, p.a12, p.b1, p.b2, p.a, p.n, p.alpha) == (0.13, 0.13, 0.06, 0.2, 0.4, 4.0, 3, 0.2)

    @pytest.mark.parametrize("field", ["a1", "a2", "a12", "b1", "b2"])
    @pytest.mark.parametrize("value", [0.0, -0.1, 1.0001])
    def test_rate_bounds(self, field, value):
        with pytest.raises(DomainError):
            ModelParams(**{field: value})

    def test_rate_upper_bound_inclusive(self):
        ModelParams(a1=1.0, b1=1.0)

    @pytest.mark.parametrize("bad", [dict(a=0.0), dict(n=0), dict(n=2.5), dict(n=True), dict(alpha=1.1), dict(alpha=-0.1), dict(tau=-1.0), dict(tau=math.inf)])
    def test_other_bounds(self, bad):
        with pytest.raises(DomainError):
            ModelParams(**bad)

    def test_with_keeps_validation(self):
        assert REFERENCE_PARAMS.with_(tau=2.0).tau == 2.0
        with pytest.raises(DomainError):
            REFERENCE_PARAMS.with_(b2=2.0)


class TestHill:
    def test_zero(self):
        assert hill(0.0, 4.0, 3) == 0.0

    @pytest.mark.parametrize("a,n", [(4.0, 3), (10.0, 8), (0.5, 1), (2.0, 2)])
    def test_half_saturation(self, a, n):
        assert hill(a ** (1 / n), a, n) == pytest.approx(0.5, abs=1e-15)

    def test_reference_equilibrium_identity(self):
        # f(y10) = b2 x20 with the published equilibrium values
        v = hill(21.03417191, 4.0, 3)
        assert v == pytest.approx(0.4 * 2.498925919, abs=1e-7)
        assert v == pytest.approx(0.9995703, abs=1e-7)

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            hill(-1e-9, 4.0, 3)


class TestHillDerivs:
    @pytest.mark.parametrize("x", [0.5, 1, 2, 5, 10, 21, 50])
    def test_against_high_precision_differences(self, x):
        got = hill_derivs(x, 4.0, 3)
        want = mp_derivs(x, 4.0, 3)
        for g, w in zip(got, want):
            assert g == pytest.approx(w, rel=1e-6, abs=1e-300)

    @pytest.mark.parametrize("x", [0.5, 2.0, 21.0])
    def test_first_derivative_float_differences(self, x):
        assert hill_derivs(x, 4.0, 3)[0] == pytest.approx(hill_fd(x, 4.0, 3, h=1e-5)[0], rel=1e-6)

    @pytest.mark.parametrize("a,n", [(4.0, 3), (10.0, 8), (2.0, 1)])
    def test_at_half_saturation(self, a, n):
        x = a ** (1 / n)
        assert hill_derivs(x, a, n)[0] == pytest.approx(n / (4 * x), rel=1e-14)

    def test_reference_rho1(self):
        y = 21.03417191
        assert hill_derivs(y, 4.0, 3)[0] == pytest.approx(3 * 4 * y**2 / (4 + y**3) ** 2, rel=1e-14)

    def test_origin(self):
        with pytest.raises(DomainError):
            hill_derivs(0.0, 4.0, 2)
        with pytest.raises(DomainError):
            hill_derivs(-1.0, 4.0, 3)
        assert hill_derivs(0.0, 4.0, 3) == (0.0, 0.0, 1.5)


class TestRhs:
    def test_origin(self):
        assert tuple(rhs(State(0, 0, 0, 0), 0.0, ModelParams())) == (1.0, 0.0, 0.0, 0.0)

    def test_formula(self):
        p = ModelParams()
        s = State(1.0, 2.0, 3.0, 4.0)
        want = (1 - p.b1, 1 - (p.a1 + p.a12 * 4) * 2, 0.7 - p.b2 * 3, 3 - (p.a2 + p.a12 * 2) * 4)
        assert np.allclose(rhs(s, 0.7, p), want, rtol=0, atol=1e-15)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            rhs(State(math.nan, 0, 0, 0), 0.0, ModelParams())


class TestLinearMatrices:
    def test_structure(self, ref):
        p, eq = ref.params, ref.eq
        lp = linear_matrices(p, eq)
        assert np.array_equal(lp.A[0], [-p.b1, 0, 0, 0])
        assert lp.A[2, 1] == pytest.approx(p.alpha * eq.rho1)
        assert np.count_nonzero(lp.B) == 1
        assert lp.B[2, 1] == pytest.approx((1 - p.alpha) * eq.rho1)
        want_A = np.array(
            [
                [-p.b1, 0, 0, 0],
                [1, -(p.a1 + p.a12 * eq.y20), 0, -p.a12 * eq.y10],
                [0, p.alpha * eq.rho1, -p.b2, 0],
                [0, -p.a12 * eq.y20, 1, -(p.a2 + p.a12 * eq.y10)],
            ]
        )
        assert np.allclose(lp.A, want_A, rtol=0, atol=1e-15)

    def test_alpha_one(self, ref):
        lp = linear_matrices(ref.params.with_(alpha=1.0), ref.eq)
        assert not lp.B.any()
        assert lp.A[2, 1] == ref.eq.rho1

    def test_sum_independent_of_alpha(self, demo):
        sums = [linear_matrices(demo.params.with_(alpha=al), demo.eq) for al in (0.0, 0.2, 0.7, 1.0)]
        for lp in sums[1:]:
            assert np.allclose(lp.A + lp.B, sums[0].A + sums[0].B, rtol=0, atol=1e-15)
