"""Center-manifold reduction at a Hopf point and the resulting normal form.

Notation: ``lam1 = i omega0`` and ``lam2 = conj(lam1)``.  ``v`` is the right
eigenvector of the linearized delay operator, ``d = (1, d2, d3, d4)`` the
unnormalized adjoint row and ``w = d / conj(eta)`` the adjoint scaled so that
the bilinear pairing of the two eigenfunctions equals one.  Every integral
with an exponential integrand over the delay window is written in terms of
:func:`window_integral` so a single series fallback covers small ``|mu tau|``.

Two formula variants are supported:

``"published"``
    the published expressions verbatim, including the degree-four cubic
    term ``rho3 v2^2 conj(v2)^2`` and ``conj(g20)`` in the fourth component
    of ``w20(0)``.
``"consistent"``
    the degree-three cubic term ``rho3 v2^2 conj(v2)`` and ``conj(g02)`` in
    the fourth component, following the pattern of the second component.
``"derived"``
    an independent derivation: projection with the left null vector ``d``
    normalized by ``d . Delta'(lam1) . v``, the nonlinearity expanded as the
    model reads (``f`` applied separately to the current and the delayed
    protein level), and ``Im(dlam/dtau)`` in ``T2``.
    Its predicted limit-cycle amplitude agrees with direct simulation.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from .equilibrium import Equilibrium
from .errors import DegenerateEigenvector, TransversalityZero
from .linalg import solve_complex_4x4
from .model import ModelParams, linear_matrices
from .stability import HopfPoint, kernel_mean, kernel_mean_prime

Variant = Literal["published", "consistent", "derived"]
VARIANTS: tuple[Variant, ...] = ("published", "consistent", "derived")


def window_integral(mu: complex, tau: float) -> complex:
    """``int_0^tau exp(-mu s) ds``."""
    return tau * kernel_mean(mu * tau)


@dataclass(frozen=True)
class EigenPair:
    lambda1: complex
    v: np.ndarray
    d: np.ndarray
    eta: complex
    w: np.ndarray
    eigen_residual: float


@dataclass(frozen=True)
class CenterTerms:
    E1: np.ndarray
    E2: np.ndarray
    w20_0: np.ndarray
    w11_0: np.ndarray
    k1: complex
    k2: complex
    k3: complex
    k4: complex
    # coefficients of the second-component profiles, kept for evaluation at -s
    _w20_coef: tuple[complex, complex, complex]
    _w11_coef: tuple[complex, complex, complex]
    lambda1: complex

    def w20_2(self, s):
        """Second component of ``w20(-s)`` for ``s`` in ``[0, tau0]``."""
        a, b, c = self._w20_coef
        lam = self.lambda1
        return a * np.exp(-lam * s) + b * np.exp(lam * s) + c * np.exp(-2 * lam * s)

    def w11_2(self, s):
        a, b, c = self._w11_coef
        lam = self.lambda1
        return a * np.exp(-lam * s) + b * np.exp(lam * s) + c


@dataclass(frozen=True)
class NormalForm:
    g20: complex
    g11: complex
    g02: complex
    g21: complex
    C1: complex
    mu2: float
    beta2: float
    T2: float
    direction: str
    orbit_stability: str
    period_trend: str
    omega0: float = float("nan")
    variant: str = "published"
    E1: np.ndarray | None = None
    E2: np.ndarray | None = None
    k: tuple[complex, complex, complex, complex] | None = None
    w20_0: np.ndarray | None = None
    w11_0: np.ndarray | None = None

    def summary(self) -> str:
        return (
            f"mu2={self.mu2:.6g}: {self.direction} (periodic solutions for tau "
            f"{'>' if self.mu2 > 0 else '<'} tau0); beta2={self.beta2:.6g}: orbits {self.orbit_stability}; "
            f"T2={self.T2:.6g}: period {self.period_trend}"
        )


def eigenpair(params: ModelParams, eq: Equilibrium, hopf: HopfPoint, variant: Variant = "published") -> EigenPair:
    """Closed-form eigenvector, adjoint and normalization constant.

    For the published variants ``eta`` is the closed-form pairing and
    ``w = d / conj(eta)``.  For ``"derived"`` ``eta = d . Delta'(lam1) . v`` and
    ``w = conj(d / eta)``, so that ``conj(w)`` is the normalized projector.
    """
    _check_variant(variant)
    p = params
    lam = 1j * hopf.omega0
    tau = hopf.tau0
    u = lam + p.a1 + p.a12 * eq.y20
    r = lam + p.a2 + p.a12 * eq.y10
    v = np.array([0.0, p.a12 * eq.y10, p.a12**2 * eq.y10 * eq.y20 - u * r, -u], dtype=complex)

    d2 = p.b1 + lam
    d4 = -p.a12 * eq.y10 * (p.b1 + lam) / r
    d3 = d4 / (p.b2 + lam)
    d = np.array([1.0, d2, d3, d4], dtype=complex)

    eta = _normalizer(v, d, lam, tau, params, eq, variant)
    if abs(eta) < 1e-12:
        raise DegenerateEigenvector(f"|eta|={abs(eta):.3g}")
    w = np.conj(d / eta) if variant == "derived" else d / np.conj(eta)

    lin = linear_matrices(p, eq)
    op = lin.A + kernel_mean(lam * tau) * lin.B
    residual = float(np.max(np.abs(op @ v - lam * v)))
    return EigenPair(lam, v, d, complex(eta), w, residual)


def _normalizer(v, d, lam, tau, params, eq, variant) -> complex:
    gain = (1 - params.alpha) * eq.rho1
    if variant == "derived":
        # d . (I - tau K'(lam tau) B) . v
        return complex(d @ v - d[2] * gain * tau * kernel_mean_prime(lam * tau) * v[1])
    e = cmath.exp(-lam * tau)
    kernel_term = gain / (tau * lam**3) * (tau * lam - 2 + 2 * e + lam * tau * e)
    return complex(v[1] * np.conj(d[1]) + v[2] * np.conj(d[2]) + v[3] * np.conj(d[3]) - np.conj(d[2]) * v[1] * kernel_term)


def second_order_terms(pair: EigenPair, params: ModelParams, eq: Equilibrium, hopf: HopfPoint, variant: Variant = "published"):
    """Forcing vectors ``F20, F11, F02`` (components 1..4).

    The published variants expand ``f`` around the mixed argument
    ``alpha u(t) + (1-alpha) u(t-s)``; ``"derived"`` expands each of
    ``alpha f(u(t))`` and ``(1-alpha) f(u(t-s))`` separately, as the model reads.
    """
    p = params
    al, tau = p.alpha, hopf.tau0
    lam1 = pair.lambda1
    lam2 = np.conj(lam1)
    v2, v4 = pair.v[1], pair.v[3]
    cv2, cv4 = np.conj(v2), np.conj(v4)
    rho2 = eq.rho2

    F20_2 = -2 * p.a12 * v2 * v4
    F11_2 = -p.a12 * (v2 * cv4 + cv2 * v4)
    F02_2 = -2 * p.a12 * cv2 * cv4

    def squared_window(mu):
        # int_0^tau (alpha + (1-alpha) exp(-mu s))^2 ds
        return al**2 * tau + 2 * al * (1 - al) * window_integral(mu, tau) + (1 - al) ** 2 * window_integral(2 * mu, tau)

    if variant == "derived":
        F20_3 = rho2 * v2**2 * (al + (1 - al) * kernel_mean(2 * lam1 * tau))
        F02_3 = np.conj(F20_3)
        F11_3 = rho2 * v2 * cv2
    else:
        F20_3 = rho2 * v2**2 / tau * squared_window(lam1)
        F02_3 = rho2 * cv2**2 / tau * squared_window(lam2)
        cross = (al**2 + (1 - al) ** 2) * tau + al * (1 - al) * (
            window_integral(lam1, tau) + window_integral(lam2, tau)
        )
        F11_3 = rho2 * v2 * cv2 / tau * cross

    F20 = np.array([0.0, F20_2, F20_3, F20_2], dtype=complex)
    F11 = np.array([0.0, F11_2, F11_3, F11_2], dtype=complex)
    F02 = np.array([0.0, F02_2, F02_3, F02_2], dtype=complex)
    return F20, F11, F02


def g_quadratic(pair: EigenPair, params: ModelParams, eq: Equilibrium, hopf: HopfPoint, variant: Variant = "published"):
    """``(g20, g11, g02)``: quadratic forcing projected on ``conj(w)``."""
    wb = np.conj(pair.w)
    F20, F11, F02 = second_order_terms(pair, params, eq, hopf, variant)
    return complex(F20 @ wb), complex(F11 @ wb), complex(F02 @ wb)


def center_terms(
    pair: EigenPair,
    gq: tuple[complex, complex, complex],
    params: ModelParams,
    eq: Equilibrium,
    hopf: HopfPoint,
    variant: Variant = "published",
) -> CenterTerms:
    """Second-order center-manifold coefficients ``E1``, ``E2`` and integrals ``k1..k4``."""
    _check_variant(variant)
    g20, g11, g02 = gq
    lam1 = pair.lambda1
    lam2 = np.conj(lam1)
    tau = hopf.tau0
    lin = linear_matrices(params, eq)
    A, B = lin.A, lin.B
    F20, F11, _ = second_order_terms(pair, params, eq, hopf, variant)

    m2 = A + kernel_mean(2 * lam1 * tau) * B - 2 * lam1 * np.eye(4)
    E2 = -solve_complex_4x4(m2, F20)
    E1 = -solve_complex_4x4(A + B, F11)

    v, cv = pair.v, np.conj(pair.v)
    w20_0 = -g20 / lam1 * v - np.conj(g02) / (3 * lam1) * cv + E2
    if variant == "published":
        # printed with conj(g20) in the fourth component
        w20_0[3] = -g20 / lam1 * v[3] - np.conj(g20) / (3 * lam1) * cv[3] + E2[3]
    w11_0 = g11 / lam1 * v - np.conj(g11) / lam1 * cv + E1

    v2, cv2 = v[1], cv[1]
    c20 = (-g20 / lam1 * v2, -np.conj(g02) / (3 * lam1) * cv2, E2[1])
    c11 = (g11 / lam1 * v2, -np.conj(g11) / lam1 * cv2, E1[1])
    W = window_integral
    k1 = c11[0] * W(lam1, tau) + c11[1] * W(lam2, tau) + c11[2] * tau
    k2 = c11[0] * W(2 * lam1, tau) + c11[1] * tau + c11[2] * W(lam1, tau)
    k3 = c20[0] * W(lam1, tau) + c20[1] * W(lam2, tau) + c20[2] * W(2 * lam1, tau)
    k4 = c20[0] * tau + c20[1] * W(2 * lam2, tau) + c20[2] * W(lam1, tau)
    return CenterTerms(E1, E2, w20_0, w11_0, complex(k1), complex(k2), complex(k3), complex(k4), c20, c11, lam1)


def g21_coeff(
    pair: EigenPair,
    ct: CenterTerms,
    params: ModelParams,
    eq: Equilibrium,
    hopf: HopfPoint,
    variant: Variant = "published",
) -> complex:
    """Cubic coefficient ``g21``."""
    _check_variant(variant)
    p = params
    al, tau = p.alpha, hopf.tau0
    lam1 = pair.lambda1
    lam2 = np.conj(lam1)
    v2, v4 = pair.v[1], pair.v[3]
    cv2, cv4 = np.conj(v2), np.conj(v4)
    w20_2, w11_2 = ct.w20_0[1], ct.w11_0[1]
    w20_4, w11_4 = ct.w20_0[3], ct.w11_0[3]
    W = window_integral

    F21_2 = -p.a12 * cv2 * w20_4 - 2 * p.a12 * v2 * w11_4 - p.a12 * cv4 * w20_2 - 2 * p.a12 * v4 * w11_2

    if variant == "derived":
        # k2 and k4 are the window integrals of exp(-lam1 s) w11(-s) and exp(-lam2 s) w20(-s)
        F21_3 = eq.rho2 * (
            2 * v2 * (al * w11_2 + (1 - al) * ct.k2 / tau) + cv2 * (al * w20_2 + (1 - al) * ct.k4 / tau)
        ) + eq.rho3 * v2**2 * cv2 * (al + (1 - al) * kernel_mean(lam1 * tau))
    else:
        e1 = cmath.exp(-lam1 * tau)
        first = al**2 * tau * w11_2 + al * (1 - al) * ct.k1 + al * (1 - al) * w11_2 * W(lam1, tau) + (1 - al) ** 2 * ct.k2
        second = (
            al**2 * tau * w20_2
            - al * (1 - al) / lam2 * w20_2 * (e1 - 1)
            + al * (1 - al) * ct.k3
            + (1 - al) ** 2 * ct.k4
        )
        cubic_window = (
            al**3 * tau + (1 - al) ** 2 * al * W(2 * lam1, tau) + (1 - al) * al**2 * W(lam2, tau) + (1 - al) ** 3 * tau
        )
        cubic_amp = v2**2 * cv2**2 if variant == "published" else v2**2 * cv2
        F21_3 = eq.rho2 / tau * (2 * v2 * first + 2 * cv2 * second) + eq.rho3 / tau * cubic_amp * cubic_window

    wb = np.conj(pair.w)
    return complex(F21_2 * wb[1] + F21_3 * wb[2] + F21_2 * wb[3])


def bifurcation_quantities(g20, g11, g02, g21, M: float, N: float, omega0: float) -> NormalForm:
    if M == 0.0:
        raise TransversalityZero("crossing speed M is zero")
    C1 = 1j / (2 * omega0) * (g20 * g11 - 2 * abs(g11) ** 2 - abs(g02) ** 2 / 3) + g21 / 2
    mu2 = -C1.real / M
    beta2 = 2 * C1.real
    T2 = -(C1.imag + mu2 * N) / omega0
    return NormalForm(
        complex(g20),
        complex(g11),
        complex(g02),
        complex(g21),
        complex(C1),
        float(mu2),
        float(beta2),
        float(T2),
        direction="supercritical" if mu2 > 0 else "subcritical",
        orbit_stability="stable" if beta2 < 0 else "unstable",
        period_trend="increasing" if T2 > 0 else "decreasing",
        omega0=omega0,
    )


def normal_form(
    params: ModelParams,
    eq: Equilibrium,
    hopf: HopfPoint,
    variant: Variant = "published",
    pair: EigenPair | None = None,
) -> NormalForm:
    """Full pipeline from a Hopf point (with ``M``, ``N`` filled) to the normal form."""
    pair = pair if pair is not None else eigenpair(params, eq, hopf, variant)
    gq = g_quadratic(pair, params, eq, hopf, variant)
    ct = center_terms(pair, gq, params, eq, hopf, variant)
    g21 = g21_coeff(pair, ct, params, eq, hopf, variant)
    # the published N is -Im(dlam/dtau)
    N = -hopf.N if variant == "derived" else hopf.N
    nf = bifurcation_quantities(*gq, g21, hopf.M, N, hopf.omega0)
    return replace(
        nf,
        variant=variant,
        E1=ct.E1,
        E2=ct.E2,
        k=(ct.k1, ct.k2, ct.k3, ct.k4),
        w20_0=ct.w20_0,
        w11_0=ct.w11_0,
    )


def rescaled_pair(
    pair: EigenPair, params: ModelParams, eq: Equilibrium, hopf: HopfPoint, zeta: complex, variant: Variant = "published"
) -> EigenPair:
    """Same eigenspace with ``v`` replaced by ``zeta v`` and ``eta``, ``w`` recomputed."""
    v = zeta * pair.v
    d = pair.d
    eta = _normalizer(v, d, pair.lambda1, hopf.tau0, params, eq, variant)
    w = np.conj(d / eta) if variant == "derived" else d / np.conj(eta)
    return EigenPair(pair.lambda1, v, d, eta, w, pair.eigen_residual * abs(zeta))


def _check_variant(variant: str) -> None:
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
