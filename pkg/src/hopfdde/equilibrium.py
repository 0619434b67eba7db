"""Positive equilibrium via a scalar reduction to the p53 protein level.

At rest ``x1 = 1/b1``, ``y2`` and ``x2`` are explicit functions of ``y1``,
and the mdm2 mRNA balance ``f(y1) = b2 * x2`` leaves the single equation
``f(y) - b2 * g(y) = 0`` on ``0 < y < 1/(a1 b1)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BracketFailure, DomainError, NoConvergence
from .model import ModelParams, hill, hill_derivs


@dataclass(frozen=True)
class Equilibrium:
    x10: float
    y10: float
    x20: float
    y20: float
    rho1: float
    rho2: float
    rho3: float
    residual: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x10, self.y10, self.x20, self.y20])


def _upper(params: ModelParams) -> float:
    return 1.0 / (params.a1 * params.b1)


def g_of(x: float, params: ModelParams) -> float:
    """mdm2 mRNA level ``x2`` implied by a p53 protein level ``x`` at rest."""
    if x <= 0:
        raise DomainError(f"g undefined at x={x!r}")
    p = params
    return (p.a2 + p.a12 * x) * (1.0 - p.a1 * p.b1 * x) / (p.b1 * p.a12 * x)


def _g_prime(x: float, params: ModelParams) -> float:
    p = params
    k = p.a1 * p.b1
    return (-p.a2 / x**2 * (1.0 - k * x) - (p.a2 / x + p.a12) * k) / (p.b1 * p.a12)


def equilibrium_residual(x: float, params: ModelParams) -> float:
    """``f(x) - b2 g(x)``; its root on the bracket is ``y10``."""
    if not (0.0 < x <= _upper(params)):
        raise DomainError(f"x={x!r} outside (0, 1/(a1 b1)]")
    return hill(x, params.a, params.n) - params.b2 * g_of(x, params)


def _assemble(y: float, params: ModelParams) -> Equilibrium:
    p = params
    x10 = 1.0 / p.b1
    y20 = (1.0 - p.a1 * p.b1 * y) / (p.b1 * p.a12 * y)
    x20 = g_of(y, p)
    rho1, rho2, rho3 = hill_derivs(y, p.a, p.n)
    fy = hill(y, p.a, p.n)
    residual = max(
        abs(1.0 - p.b1 * x10),
        abs(x10 - (p.a1 + p.a12 * y20) * y),
        abs(fy - p.b2 * x20),
        abs(x20 - (p.a2 + p.a12 * y) * y20),
    )
    return Equilibrium(x10, y, x20, y20, rho1, rho2, rho3, residual)


def find_equilibrium(params: ModelParams, tol: float = 1e-12, max_iter: int = 200) -> Equilibrium:
    """Unique positive equilibrium of the model.

    Bisection down to a bracket width of 1e-3, then Newton polishing with the
    analytic derivative ``f' - b2 g'`` (falling back to bisection whenever a
    Newton step leaves the bracket).
    """
    if not (1e-14 <= tol <= 1e-6):
        raise DomainError(f"tol={tol!r} outside [1e-14, 1e-6]")
    p = params
    top = _upper(p)
    lo, hi = 1e-12 * top, top * (1.0 - 1e-12)
    r_lo, r_hi = equilibrium_residual(lo, p), equilibrium_residual(hi, p)
    if not (r_lo < 0.0 < r_hi):
        raise BracketFailure(f"no sign change on [{lo:.3g}, {hi:.3g}]: r={r_lo:.3g}, {r_hi:.3g}")

    grid = np.geomspace(lo, hi, 257)
    values = np.array([equilibrium_residual(x, p) for x in grid])
    if np.any(np.diff(values) <= 0.0):
        raise BracketFailure("residual is not monotone on the bracket; uniqueness lost")

    it = 0
    while hi - lo > 1e-3 * max(1.0, lo) and it < max_iter:
        mid = 0.5 * (lo + hi)
        if equilibrium_residual(mid, p) < 0.0:
            lo = mid
        else:
            hi = mid
        it += 1

    x = 0.5 * (lo + hi)
    for _ in range(max_iter - it):
        r = equilibrium_residual(x, p)
        if r == 0.0:
            return _assemble(x, p)
        if r < 0.0:
            lo = x
        else:
            hi = x
        slope = hill_derivs(x, p.a, p.n)[0] - p.b2 * _g_prime(x, p)
        step = x - r / slope
        if not (lo < step < hi):
            step = 0.5 * (lo + hi)
        dx, x = abs(step - x), step
        if dx <= 1e-14 * x and abs(equilibrium_residual(x, p)) < tol:
            return _assemble(x, p)
    raise NoConvergence(f"equilibrium solver exceeded {max_iter} iterations (x={x:.17g})")
