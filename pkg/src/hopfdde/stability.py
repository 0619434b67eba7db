"""Characteristic function, zero-delay test, Hopf location and transversality.

After factoring out the decoupled root ``-b1`` the characteristic function is

    Delta(lam, tau) = lam^3 + b lam^2 + c lam + d + h K(lam tau),
    K(z) = (1 - exp(-z)) / z,

where ``K`` is the Laplace transform of the uniform kernel on ``[0, tau]``.
A Hopf candidate ``lam = i omega`` solves the real/imaginary split

    sin(omega tau) = tau omega (b omega^2 - d) / h
    cos(omega tau) = 1 - tau omega^2 (c - omega^2) / h

Every ``(omega, 0)`` solves that split trivially, so refined points are only
accepted after a direct check of ``|Delta(i omega, tau)|``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .equilibrium import Equilibrium
from .errors import DegenerateRoot, DomainError, EmptyResult, NoConvergence, SingularJacobian, SpuriousRoot
from .model import ModelParams

SERIES_CUTOFF = 1e-4
REFINE_TOL = 1e-10
DELTA_TOL = 1e-8
DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class CharCoeffs:
    b: float
    c: float
    d: float
    h: float


@dataclass(frozen=True)
class HopfPoint:
    omega0: float
    tau0: float
    residual_sin: float = math.nan
    residual_cos: float = math.nan
    delta_abs: float = math.nan
    M1: float = math.nan
    M2: float = math.nan
    M: float = math.nan
    N: float = math.nan
    simple: bool = False
    transversal: bool = False
    iterations: int = 0


@dataclass
class HopfSearch:
    """Outcome of scanning and refining: accepted points plus rejected candidates."""

    points: list[HopfPoint] = field(default_factory=list)
    rejected: list[tuple[float, float, str]] = field(default_factory=list)
    candidates: int = 0

    @property
    def critical(self) -> HopfPoint | None:
        return self.points[0] if self.points else None


def char_coeffs(params: ModelParams, eq: Equilibrium) -> CharCoeffs:
    p = params
    s = eq.y10 + eq.y20
    b = p.a1 + p.a2 + p.b2 + p.a12 * s
    c = p.b2 * (p.a1 + p.a2) + p.b2 * p.a12 * s + p.a1 * p.a2 + p.a12 * (p.a1 * eq.y10 + p.a2 * eq.y20)
    loop = p.a12 * eq.y10 * eq.rho1
    d = p.b2 * p.a1 * p.a2 + p.a12 * p.b2 * (eq.y20 * p.a2 + p.a1 * eq.y10) + p.alpha * loop
    h = (1.0 - p.alpha) * loop
    return CharCoeffs(b, c, d, h)


def kernel_mean(z: complex) -> complex:
    """``(1 - exp(-z)) / z`` with its removable singularity at 0 filled in."""
    if abs(z) < SERIES_CUTOFF:
        return 1.0 - z / 2.0 + z * z / 6.0 - z**3 / 24.0
    return (1.0 - cmath.exp(-z)) / z


def kernel_mean_prime(z: complex) -> complex:
    """Derivative of :func:`kernel_mean`, ``((1 + z) exp(-z) - 1) / z^2``."""
    if abs(z) < SERIES_CUTOFF:
        return -0.5 + z / 3.0 - z * z / 8.0 + z**3 / 30.0
    return ((1.0 + z) * cmath.exp(-z) - 1.0) / (z * z)


def char_delta(lam: complex, tau: float, coeffs: CharCoeffs) -> complex:
    if tau < 0:
        raise DomainError(f"tau={tau!r} must be nonnegative")
    k = coeffs
    return lam**3 + k.b * lam**2 + k.c * lam + k.d + k.h * kernel_mean(lam * tau)


def char_delta_dlambda(lam: complex, tau: float, coeffs: CharCoeffs) -> complex:
    k = coeffs
    return 3 * lam**2 + 2 * k.b * lam + k.c + k.h * tau * kernel_mean_prime(lam * tau)


def char_delta_dtau(lam: complex, tau: float, coeffs: CharCoeffs) -> complex:
    return coeffs.h * lam * kernel_mean_prime(lam * tau)


def zero_delay_stable(coeffs: CharCoeffs) -> bool:
    """Routh-Hurwitz for the cubic with positive coefficients."""
    return coeffs.c * coeffs.b > coeffs.d + coeffs.h


def zero_delay_roots(coeffs: CharCoeffs) -> np.ndarray:
    k = coeffs
    return np.roots([1.0, k.b, k.c, k.d + k.h])


def g1(omega, coeffs: CharCoeffs):
    """Delay paired with ``omega`` by eliminating the phase from the split system."""
    k = coeffs
    w2 = np.asarray(omega, dtype=float) ** 2
    out = 2.0 * k.h * (k.c - w2) / ((k.b * w2 - k.d) ** 2 + w2 * (k.c - w2) ** 2)
    return out if np.ndim(out) else float(out)


def split_residuals(omega, tau, coeffs: CharCoeffs):
    """Residuals of the sin/cos equations; vectorised over numpy inputs."""
    k = coeffs
    wt = omega * tau
    r_sin = np.sin(wt) - tau * omega * (k.b * omega**2 - k.d) / k.h
    r_cos = np.cos(wt) - 1.0 + tau * omega**2 * (k.c - omega**2) / k.h
    return r_sin, r_cos


def hopf_scan(coeffs: CharCoeffs, grid_size: int = 4000, threshold: float = 1e-2) -> list[HopfPoint]:
    """Coarse candidates on a uniform omega grid over ``(0, sqrt(c)]``.

    Grid points whose split residuals both fall below ``threshold`` are
    grouped into contiguous runs; each run contributes its best point.
    Candidates are returned ordered by delay.
    """
    if grid_size < 100:
        raise DomainError("grid_size must be at least 100")
    if coeffs.h <= 0.0:
        raise EmptyResult("h = 0: the delayed term vanishes, no delay-induced Hopf")
    top = math.sqrt(coeffs.c)
    omega = top * np.arange(1, grid_size + 1) / grid_size
    tau = g1(omega, coeffs)
    r_sin, r_cos = split_residuals(omega, tau, coeffs)
    score = np.abs(r_sin) + np.abs(r_cos)
    ok = (np.abs(r_sin) < threshold) & (np.abs(r_cos) < threshold) & (omega * tau <= 2 * math.pi) & (tau >= 0)

    found = []
    i = 0
    while i < grid_size:
        if not ok[i]:
            i += 1
            continue
        j = i
        while j + 1 < grid_size and ok[j + 1]:
            j += 1
        best = i + int(np.argmin(score[i : j + 1]))
        found.append(HopfPoint(float(omega[best]), float(tau[best]), float(r_sin[best]), float(r_cos[best])))
        i = j + 1
    if not found:
        raise EmptyResult("no (omega, tau) pair passes the coarse residual filter")
    return sorted(found, key=lambda hp: hp.tau0)


def _jacobian(omega: float, tau: float, k: CharCoeffs) -> np.ndarray:
    wt = omega * tau
    p = k.b * omega**2 - k.d
    q = k.c - omega**2
    return np.array(
        [
            [tau * math.cos(wt) - tau * (p + 2 * k.b * omega**2) / k.h, omega * math.cos(wt) - omega * p / k.h],
            [-tau * math.sin(wt) + tau * (2 * omega * q - 2 * omega**3) / k.h, -omega * math.sin(wt) + omega**2 * q / k.h],
        ]
    )


def hopf_refine(candidate: HopfPoint, coeffs: CharCoeffs, max_iter: int = 100) -> HopfPoint:
    """Newton iteration on the split residuals in ``(omega, tau)``."""
    omega, tau = candidate.omega0, candidate.tau0
    for it in range(max_iter + 1):
        r = np.array(split_residuals(omega, tau, coeffs))
        if np.max(np.abs(r)) < REFINE_TOL:
            break
        if it == max_iter:
            raise NoConvergence(f"Newton did not converge from omega={candidate.omega0:.6g}, tau={candidate.tau0:.6g}")
        J = _jacobian(omega, tau, coeffs)
        det = np.linalg.det(J)
        if not math.isfinite(det) or abs(det) < 1e-14 * max(1.0, np.max(np.abs(J)) ** 2):
            raise SingularJacobian(f"degenerate Newton step at omega={omega:.6g}, tau={tau:.6g}")
        step = np.linalg.solve(J, -r)
        omega, tau = omega + step[0], tau + step[1]
    else:  # pragma: no cover - loop always breaks or raises
        pass

    if omega < 0:
        omega, tau = -omega, tau
    delta_abs = abs(char_delta(1j * omega, max(tau, 0.0), coeffs)) if tau >= 0 else math.inf
    r_sin, r_cos = split_residuals(omega, tau, coeffs)
    if not (tau > 0 and omega > 0 and delta_abs < DELTA_TOL):
        raise SpuriousRoot(
            f"split system solved at omega={omega:.6g}, tau={tau:.6g} but |Delta|={delta_abs:.3g}"
        )
    return replace(
        candidate,
        omega0=float(omega),
        tau0=float(tau),
        residual_sin=float(r_sin),
        residual_cos=float(r_cos),
        delta_abs=float(delta_abs),
        iterations=it,
    )


def transversality(hopf: HopfPoint, coeffs: CharCoeffs) -> tuple[float, float, float, float]:
    """Crossing speed ``M`` and the paired quantity ``N``; returns ``(M, N, M1, M2)``.

    ``M1 + i M2`` is ``dDelta/dlam`` and ``N1 + i N2`` is ``dDelta/dtau`` at the
    Hopf point, both simplified with the split equations.  ``M`` is the real
    part of ``dlam/dtau``; ``N`` is defined as ``(M1 N2 - M2 N1)/|M1 + i M2|^2``,
    which equals ``-Im(dlam/dtau)``.
    """
    k = coeffs
    w, t = hopf.omega0, hopf.tau0
    p = k.b * w * w - k.d
    q = k.c - w * w
    M1 = -4 * w * w + 2 * k.c - t * p
    M2 = (3 * k.b * w * w - k.d - k.h) / w + t * w * q
    N1 = (k.h - p - t * w * w * q) / t
    N2 = (w * q - t * w * p) / t
    den = M1 * M1 + M2 * M2
    if den <= DEGENERACY_TOL:
        raise DegenerateRoot(f"i*omega0 is not a simple root (M1^2+M2^2={den:.3g})")
    M = -(M1 * N1 + M2 * N2) / den
    N = (M1 * N2 - M2 * N1) / den
    return M, N, M1, M2


def with_transversality(hopf: HopfPoint, coeffs: CharCoeffs) -> HopfPoint:
    M, N, M1, M2 = transversality(hopf, coeffs)
    return replace(
        hopf,
        M=M,
        N=N,
        M1=M1,
        M2=M2,
        simple=M1 * M1 + M2 * M2 > DEGENERACY_TOL,
        transversal=abs(M) > DEGENERACY_TOL,
    )


def find_hopf_points(coeffs: CharCoeffs, grid_size: int = 4000) -> HopfSearch:
    """Scan, refine and certify; duplicates and spurious roots are dropped."""
    search = HopfSearch()
    try:
        candidates = hopf_scan(coeffs, grid_size)
    except EmptyResult:
        return search
    search.candidates = len(candidates)
    for cand in candidates:
        try:
            point = with_transversality(hopf_refine(cand, coeffs), coeffs)
        except (NoConvergence, SingularJacobian, SpuriousRoot, DegenerateRoot) as exc:
            search.rejected.append((cand.omega0, cand.tau0, f"{type(exc).__name__}: {exc}"))
            continue
        if any(abs(point.omega0 - q.omega0) < 1e-8 and abs(point.tau0 - q.tau0) < 1e-8 for q in search.points):
            continue
        search.points.append(point)
    search.points.sort(key=lambda hp: hp.tau0)
    return search
