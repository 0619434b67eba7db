import cmath
import dataclasses
import math
from types import SimpleNamespace

import numpy as np
import pytest

from hopfdde.errors import TransversalityZero
from hopfdde.model import linear_matrices
from hopfdde.normalform import (
    VARIANTS,
    bifurcation_quantities,
    center_terms,
    eigenpair,
    g21_coeff,
    g_quadratic,
    normal_form,
    rescaled_pair,
    second_order_terms,
    window_integral,
)
from hopfdde.reference import REFERENCE_HOPF_PAIR
from hopfdde.stability import HopfPoint, kernel_mean, transversality
from oracles import cquad, exp_window, hale_bilinear, lyapunov_c1, printed_bilinear

PRINTED = ("published", "consistent")


@pytest.fixture(scope="module")
def pieces(demo):
    out = {}
    for v in VARIANTS:
        pair = eigenpair(demo.params, demo.eq, demo.hopf, v)
        gq = g_quadratic(pair, demo.params, demo.eq, demo.hopf, v)
        ct = center_terms(pair, gq, demo.params, demo.eq, demo.hopf, v)
        out[v] = SimpleNamespace(pair=pair, gq=gq, ct=ct, nf=normal_form(demo.params, demo.eq, demo.hopf, v, pair=pair))
    return out


class TestEigenpair:
    def test_eigen_residual(self, pieces):
        for p in pieces.values():
            assert p.pair.v[0] == 0
            assert p.pair.eigen_residual < 1e-9

    def test_residual_by_direct_multiply(self, demo, pieces):
        lp = linear_matrices(demo.params, demo.eq)
        lam, tau = pieces["published"].pair.lambda1, demo.hopf.tau0
        v = pieces["published"].pair.v
        K = (1 - cmath.exp(-lam * tau)) / (lam * tau)
        assert np.max(np.abs((lp.A + K * lp.B) @ v - lam * v)) < 1e-9

    def test_adjoint_is_left_null_vector(self, demo, pieces):
        lp = linear_matrices(demo.params, demo.eq)
        lam, tau = pieces["published"].pair.lambda1, demo.hopf.tau0
        d = pieces["published"].pair.d
        K = (1 - cmath.exp(-lam * tau)) / (lam * tau)
        assert np.max(np.abs(d @ (lp.A + K * lp.B) - lam * d)) < 1e-9

    @pytest.mark.parametrize("variant", PRINTED)
    def test_printed_pairing_is_one(self, demo, pieces, variant):
        pair = pieces[variant].pair
        B = linear_matrices(demo.params, demo.eq).B
        lam = pair.lambda1
        got = printed_bilinear(pair.w, lam, pair.v, lam, B, demo.hopf.tau0)
        assert abs(got - 1) < 1e-7
        got_bar = printed_bilinear(np.conj(pair.w), np.conj(lam), np.conj(pair.v), np.conj(lam), B, demo.hopf.tau0)
        assert abs(got_bar - 1) < 1e-7

    def test_printed_pairing_with_conjugate_is_not_zero(self, demo, pieces):
        # the printed pairing does not separate Phi from conj(Phi) at the demo Hopf point
        pair = pieces["published"].pair
        B = linear_matrices(demo.params, demo.eq).B
        lam = pair.lambda1
        got = printed_bilinear(pair.w, lam, np.conj(pair.v), np.conj(lam), B, demo.hopf.tau0)
        assert got == pytest.approx(1.372 - 1.254j, abs=2e-3)

    def test_derived_pairing_is_biorthogonal(self, demo, pieces):
        pair = pieces["derived"].pair
        B = linear_matrices(demo.params, demo.eq).B
        lam, tau = pair.lambda1, demo.hopf.tau0
        row = np.conj(pair.w)
        assert abs(hale_bilinear(row, lam, pair.v, lam, B, tau) - 1) < 1e-9
        assert abs(hale_bilinear(row, lam, np.conj(pair.v), np.conj(lam), B, tau)) < 1e-9


class TestQuadratic:
    def test_a12_zero_leaves_only_f3(self, demo, pieces):
        pair = pieces["published"].pair
        p0 = SimpleNamespace(**{**demo.params.as_dict(), "a12": 0.0})
        for F in second_order_terms(pair, p0, demo.eq, demo.hopf):
            assert F[1] == 0 and F[3] == 0 and F[2] != 0

    def test_rho2_zero(self, demo, pieces):
        eq0 = dataclasses.replace(demo.eq, rho2=0.0)
        for v in VARIANTS:
            for F in second_order_terms(pieces[v].pair, demo.params, eq0, demo.hopf, v):
                assert F[2] == 0

    @pytest.mark.parametrize("variant", VARIANTS)
    def test_f02_is_conjugate_of_f20(self, demo, pieces, variant):
        F20, _, F02 = second_order_terms(pieces[variant].pair, demo.params, demo.eq, demo.hopf, variant)
        assert F02[2] == pytest.approx(np.conj(F20[2]), rel=1e-13)

    def test_squared_windows_by_quadrature(self, demo, pieces):
        al, tau = demo.params.alpha, demo.hopf.tau0
        pair = pieces["published"].pair
        lam, v2 = pair.lambda1, pair.v[1]
        F20, F11, _ = second_order_terms(pair, demo.params, demo.eq, demo.hopf)
        q20 = cquad(lambda s: (al + (1 - al) * np.exp(-lam * s)) ** 2, 0, tau)
        q11 = cquad(lambda s: (al + (1 - al) * np.exp(-lam * s)) * (al + (1 - al) * np.exp(lam * s)), 0, tau)
        assert F20[2] == pytest.approx(demo.eq.rho2 * v2**2 / tau * q20, rel=1e-9)
        assert F11[2] == pytest.approx(demo.eq.rho2 * abs(v2) ** 2 / tau * q11, rel=1e-9)

    def test_derived_forcing_by_quadrature(self, demo, pieces):
        al, tau = demo.params.alpha, demo.hopf.tau0
        pair = pieces["derived"].pair
        lam, v2 = pair.lambda1, pair.v[1]
        F20, F11, _ = second_order_terms(pair, demo.params, demo.eq, demo.hopf, "derived")
        # alpha u(0)^2 + (1-alpha)/tau int u(-s)^2 ds for u(theta) = v2 e^{lam theta}
        want = demo.eq.rho2 * v2**2 * (al + (1 - al) / tau * cquad(lambda s: np.exp(-2 * lam * s), 0, tau))
        assert F20[2] == pytest.approx(want, rel=1e-9)
        assert F11[2] == pytest.approx(demo.eq.rho2 * abs(v2) ** 2, rel=1e-14)


class TestCenterTerms:
    def test_window_integral(self):
        for mu, tau in ((0.3 + 0.7j, 2.0), (1.3j, 0.5), (1e-6j, 3.0), (2.0, 1.0)):
            assert abs(window_integral(mu, tau) - exp_window(mu, tau)) < 1e-9

    def test_e2_kernel_factor(self, demo, pieces):
        lam, tau = pieces["published"].pair.lambda1, demo.hopf.tau0
        printed = -(1 / (2 * lam * tau)) * (cmath.exp(-2 * lam * tau) - 1)
        assert abs(kernel_mean(2 * lam * tau) - printed) < 1e-12
        assert abs(kernel_mean(2 * lam * tau) - exp_window(2 * lam, tau) / tau) < 1e-9

    @pytest.mark.parametrize("variant", VARIANTS)
    def test_k_integrals_by_quadrature(self, demo, pieces, variant):
        ct, tau = pieces[variant].ct, demo.hopf.tau0
        lam = ct.lambda1
        assert abs(ct.k1 - cquad(ct.w11_2, 0, tau)) < 1e-9
        assert abs(ct.k2 - cquad(lambda s: np.exp(-lam * s) * ct.w11_2(s), 0, tau)) < 1e-9
        assert abs(ct.k3 - cquad(ct.w20_2, 0, tau)) < 1e-9
        assert abs(ct.k4 - cquad(lambda s: np.exp(lam * s) * ct.w20_2(s), 0, tau)) < 1e-9

    @pytest.mark.parametrize("variant", VARIANTS)
    def test_profiles_at_zero(self, pieces, variant):
        ct = pieces[variant].ct
        assert ct.w11_2(0.0) == pytest.approx(ct.w11_0[1], rel=1e-14)
        assert ct.w20_2(0.0) == pytest.approx(ct.w20_0[1], rel=1e-14)

    def test_e1_alpha_independent(self, demo, pieces):
        F11 = second_order_terms(pieces["published"].pair, demo.params, demo.eq, demo.hopf)[1]
        sols = []
        for al in (0.0, 0.2, 1.0):
            lp = linear_matrices(demo.params.with_(alpha=al), demo.eq)
            sols.append(-np.linalg.solve(lp.A + lp.B, F11))
        assert np.allclose(sols[0], sols[1], rtol=1e-13, atol=1e-13) and np.allclose(sols[0], sols[2], rtol=1e-13, atol=1e-13)
        assert np.allclose(pieces["published"].ct.E1, sols[0], rtol=1e-12, atol=1e-13)

    def test_e2_solves_resolvent(self, demo, pieces):
        lp = linear_matrices(demo.params, demo.eq)
        p = pieces["published"]
        lam, tau = p.pair.lambda1, demo.hopf.tau0
        F20 = second_order_terms(p.pair, demo.params, demo.eq, demo.hopf)[0]
        m = lp.A + kernel_mean(2 * lam * tau) * lp.B - 2 * lam * np.eye(4)
        assert np.max(np.abs(m @ p.ct.E2 + F20)) < 1e-10 * (1 + np.max(np.abs(F20)))


class TestG21:
    def test_vanishes_without_nonlinearity(self, demo, pieces):
        eq0 = dataclasses.replace(demo.eq, rho2=0.0, rho3=0.0)
        p0 = SimpleNamespace(**{**demo.params.as_dict(), "a12": 0.0})
        for v in VARIANTS:
            pair = pieces[v].pair
            gq = g_quadratic(pair, p0, eq0, demo.hopf, v)
            assert gq == (0, 0, 0)
            ct = center_terms(pair, gq, demo.params, eq0, demo.hopf, v)
            assert g21_coeff(pair, ct, p0, eq0, demo.hopf, v) == 0

    def test_alpha_one_reduction(self, demo):
        p1 = demo.params.with_(alpha=1.0)
        hp = demo.hopf  # any pair works for this algebraic check
        pair = eigenpair(p1, demo.eq, hp)
        gq = g_quadratic(pair, p1, demo.eq, hp)
        ct = center_terms(pair, gq, p1, demo.eq, hp)
        a12 = p1.a12
        v2, v4 = pair.v[1], pair.v[3]
        F21_2 = -a12 * (np.conj(v2) * ct.w20_0[3] + 2 * v2 * ct.w11_0[3] + np.conj(v4) * ct.w20_0[1] + 2 * v4 * ct.w11_0[1])
        tau = hp.tau0
        F21_3 = demo.eq.rho2 * 2 * (v2 * tau * ct.w11_0[1] + np.conj(v2) * tau * ct.w20_0[1]) / tau
        F21_3 += demo.eq.rho3 * v2**2 * np.conj(v2) ** 2
        wb = np.conj(pair.w)
        want = F21_2 * (wb[1] + wb[3]) + F21_3 * wb[2]
        assert g21_coeff(pair, ct, p1, demo.eq, hp) == pytest.approx(want, rel=1e-12)

    def test_reordered_evaluation_at_reference_pair(self, ref):
        w, tau = REFERENCE_HOPF_PAIR
        M, N, M1, M2 = transversality(HopfPoint(w, tau), ref.coeffs)
        hp = HopfPoint(w, tau, M1=M1, M2=M2, M=M, N=N)
        p, eq = ref.params, ref.eq
        pair = eigenpair(p, eq, hp)
        gq = g_quadratic(pair, p, eq, hp)
        ct = center_terms(pair, gq, p, eq, hp)
        got = g21_coeff(pair, ct, p, eq, hp)
        assert np.isfinite(got)

        # printed expression summed back to front
        al, lam1 = p.alpha, pair.lambda1
        lam2 = np.conj(lam1)
        v2, v4 = pair.v[1], pair.v[3]
        cv2, cv4 = np.conj(v2), np.conj(v4)
        W = lambda mu: window_integral(mu, tau)  # noqa: E731
        cubic = (1 - al) ** 3 * tau + (1 - al) * al**2 * W(lam2) + (1 - al) ** 2 * al * W(2 * lam1) + al**3 * tau
        second = (1 - al) ** 2 * ct.k4 + al * (1 - al) * ct.k3 - al * (1 - al) / lam2 * ct.w20_0[1] * (cmath.exp(-lam1 * tau) - 1) + al**2 * tau * ct.w20_0[1]
        first = (1 - al) ** 2 * ct.k2 + al * (1 - al) * ct.w11_0[1] * W(lam1) + al * (1 - al) * ct.k1 + al**2 * tau * ct.w11_0[1]
        F3 = eq.rho3 / tau * cv2**2 * v2**2 * cubic + eq.rho2 / tau * (2 * cv2 * second + 2 * v2 * first)
        F2 = -2 * p.a12 * v4 * ct.w11_0[1] - p.a12 * cv4 * ct.w20_0[1] - 2 * p.a12 * v2 * ct.w11_0[3] - p.a12 * cv2 * ct.w20_0[3]
        wb = np.conj(pair.w)
        again = F2 * wb[3] + F3 * wb[2] + F2 * wb[1]
        assert abs(got - again) <= 1e-10 * abs(got)


class TestBifurcationQuantities:
    def test_zero_coefficients(self):
        nf = bifurcation_quantities(0, 0, 0, 0, M=0.3, N=0.1, omega0=0.7)
        assert (nf.C1, nf.mu2, nf.beta2, nf.T2) == (0, 0, 0, 0)

    def test_formulas(self):
        g20, g11, g02, g21 = 1 + 2j, -0.5 + 0.1j, 0.3j, -2 + 1j
        M, N, w = 0.4, -0.2, 0.9
        nf = bifurcation_quantities(g20, g11, g02, g21, M, N, w)
        C1 = 1j / (2 * w) * (g20 * g11 - 2 * abs(g11) ** 2 - abs(g02) ** 2 / 3) + g21 / 2
        assert nf.C1 == pytest.approx(C1, rel=1e-15)
        assert nf.mu2 == pytest.approx(-C1.real / M, rel=1e-15)
        assert nf.beta2 == pytest.approx(2 * C1.real, rel=1e-15)
        assert nf.T2 == pytest.approx(-(C1.imag + nf.mu2 * N) / w, rel=1e-15)

    def test_classification(self):
        nf = bifurcation_quantities(0, 0, 0, -1.0, M=0.5, N=0.0, omega0=1.0)
        assert nf.mu2 > 0 and nf.direction == "supercritical" and nf.orbit_stability == "stable"
        nf = bifurcation_quantities(0, 0, 0, 1.0 + 1j, M=0.5, N=0.0, omega0=1.0)
        assert nf.direction == "subcritical" and nf.orbit_stability == "unstable"
        assert nf.period_trend == ("increasing" if nf.T2 > 0 else "decreasing")

    def test_zero_crossing_speed(self):
        with pytest.raises(TransversalityZero):
            bifurcation_quantities(1, 1, 1, 1, M=0.0, N=0.0, omega0=1.0)


class TestScaling:
    @pytest.mark.parametrize("variant", ("consistent", "derived"))
    def test_phase_invariance(self, demo, pieces, variant):
        base = pieces[variant].nf
        for phi in (0.3, 1.7, -2.9):
            pair = rescaled_pair(pieces[variant].pair, demo.params, demo.eq, demo.hopf, cmath.exp(1j * phi), variant)
            nf = normal_form(demo.params, demo.eq, demo.hopf, variant, pair=pair)
            assert nf.C1 == pytest.approx(base.C1, rel=1e-10)

    @pytest.mark.parametrize("variant", ("consistent", "derived"))
    def test_scales_with_modulus_squared(self, demo, pieces, variant):
        base = pieces[variant].nf
        zeta = 1.7 * cmath.exp(0.4j)
        pair = rescaled_pair(pieces[variant].pair, demo.params, demo.eq, demo.hopf, zeta, variant)
        nf = normal_form(demo.params, demo.eq, demo.hopf, variant, pair=pair)
        assert nf.C1 == pytest.approx(abs(zeta) ** 2 * base.C1, rel=1e-10)


class TestDerivedAgainstOracle:
    def test_matches_generic_lyapunov_formula(self, demo, pieces):
        lp = linear_matrices(demo.params, demo.eq)
        p = pieces["derived"]
        c1, _ = lyapunov_c1(
            lp.A, lp.B, demo.hopf.tau0, demo.hopf.omega0, demo.eq.rho2, demo.eq.rho3, demo.params.a12, demo.params.alpha, q=p.pair.v
        )
        assert p.nf.C1 == pytest.approx(c1, rel=1e-9)

    def test_amplitude_law_is_normalization_free(self, demo, pieces):
        lp = linear_matrices(demo.params, demo.eq)
        c1, q = lyapunov_c1(lp.A, lp.B, demo.hopf.tau0, demo.hopf.omega0, demo.eq.rho2, demo.eq.rho3, demo.params.a12, demo.params.alpha)
        nf, pair = pieces["derived"].nf, pieces["derived"].pair
        ours = 2 * abs(pair.v[1]) / math.sqrt(nf.mu2)
        oracle = 2 * abs(q[1]) / math.sqrt(-c1.real / demo.hopf.M)
        assert ours == pytest.approx(oracle, rel=1e-9)


def test_sign_classification_per_variant(pieces):
    # direct integration finds small stable cycles just above tau0; only the derived variant agrees
    assert (pieces["derived"].nf.direction, pieces["derived"].nf.orbit_stability) == ("supercritical", "stable")
    for v in PRINTED:
        assert (pieces[v].nf.direction, pieces[v].nf.orbit_stability) == ("subcritical", "unstable")


def test_frozen_demo_values(pieces):
    nf = pieces["derived"].nf
    assert nf.mu2 == pytest.approx(90.23, rel=1e-3)
    assert nf.beta2 == pytest.approx(-5.42, rel=1e-3)
    assert nf.T2 == pytest.approx(14.20, rel=1e-3)
    assert pieces["published"].nf.mu2 == pytest.approx(-347.47, rel=1e-4)
    assert pieces["consistent"].nf.mu2 == pytest.approx(-292.66, rel=1e-4)
