"""The p53-mdm2 model with a uniformly distributed delay.

State ordering throughout the package is ``(x1, y1, x2, y2)``: mRNA and
protein of p53, then mRNA and protein of mdm2.  The mdm2 transcription
rate is driven by the Hill function of p53 protein, averaged over the
window ``[t - tau, t]`` and mixed with the instantaneous value by the
weight ``alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import NamedTuple

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class ModelParams:
    """Rate constants, Hill parameters, mixing weight and delay.

    Degradation rates must lie in (0, 1]; ``n`` is a positive integer.
    """

    a1: float = 0.13
    a2: float = 0.13
    a12: float = 0.06
    b1: float = 0.2
    b2: float = 0.4
    a: float = 4.0
    n: int = 3
    alpha: float = 0.2
    tau: float = 0.0

    def __post_init__(self):
        for name in ("a1", "a2", "a12", "b1", "b2"):
            value = getattr(self, name)
            if not (0.0 < value <= 1.0):
                raise DomainError(f"{name}={value!r} must lie in (0, 1]")
        if not self.a > 0.0:
            raise DomainError(f"a={self.a!r} must be positive")
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise DomainError(f"n={self.n!r} must be a positive integer")
        if not (0.0 <= self.alpha <= 1.0):
            raise DomainError(f"alpha={self.alpha!r} must lie in [0, 1]")
        if not (self.tau >= 0.0 and math.isfinite(self.tau)):
            raise DomainError(f"tau={self.tau!r} must be a finite nonnegative number")

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


#: Parameter set of the published numerical example (with a12 = 0.06).
REFERENCE_PARAMS = ModelParams()

#: A set inside the admissible box for which a genuine delay-induced Hopf
#: bifurcation exists (tau0 ~ 2.53, omega0 ~ 0.668).
DEMO_PARAMS = ModelParams(a1=0.3, a2=0.4, a12=1.0, b1=0.5, b2=0.3, a=10.0, n=8, alpha=0.2)


class State(NamedTuple):
    x1: float
    y1: float
    x2: float
    y2: float


@dataclass(frozen=True)
class LinearPair:
    """Instantaneous part ``A`` and window-averaged part ``B`` of the linearization."""

    A: np.ndarray
    B: np.ndarray


def _fractions(x: float, a: float, n: int) -> tuple[float, float]:
    """``(x^n / (a + x^n), a / (a + x^n))`` for ``x > 0`` without overflow."""
    t = n * math.log(x) - math.log(a)
    if t < 0:
        e = math.exp(t)
        return e / (1.0 + e), 1.0 / (1.0 + e)
    e = math.exp(-t)
    return 1.0 / (1.0 + e), e / (1.0 + e)


def hill(x: float, a: float, n: int) -> float:
    """Return ``x**n / (a + x**n)``, kept strictly below 1 in floating point."""
    if x < 0:
        raise DomainError(f"Hill function undefined for x={x!r} < 0")
    if x == 0:
        return 0.0
    try:
        xn = x**n
    except OverflowError:
        return _BELOW_ONE
    if xn <= a:
        return xn / (a + xn)
    return min(1.0 / (1.0 + a / xn), _BELOW_ONE)


_BELOW_ONE = math.nextafter(1.0, 0.0)


def hill_derivs(x: float, a: float, n: int) -> tuple[float, float, float]:
    """Analytic first, second and third derivatives of :func:`hill` at ``x``.

    With ``D = a + x**n``::

        f'   = n a x^(n-1) / D^2
        f''  = n a x^(n-2) ((n-1) a - (n+1) x^n) / D^3
        f''' = n a x^(n-3) ((n-1)(n-2) a^2 - 4 (n^2-1) a x^n + (n+1)(n+2) x^(2n)) / D^4

    evaluated through ``u = x^n / D`` and ``q = a / D`` so that large ``x^n``
    cannot overflow.
    """
    if x < 0 or (x == 0 and n < 3):
        raise DomainError(f"Hill derivatives undefined at x={x!r} for n={n}")
    if x == 0:
        # n >= 3: only the third derivative of x^3/(a+x^3) survives
        return 0.0, 0.0, (6.0 / a if n == 3 else 0.0)
    u, q = _fractions(x, a, n)
    base = n * u * q
    rho1 = base / x
    rho2 = base * ((n - 1) * q - (n + 1) * u) / (x * x)
    rho3 = base * ((n - 1) * (n - 2) * q * q - 4 * (n * n - 1) * q * u + (n + 1) * (n + 2) * u * u) / x**3
    return rho1, rho2, rho3


def rhs(state, delayed_term: float, params: ModelParams) -> State:
    """Right-hand side of the four-equation system.

    ``delayed_term`` is the mixed instantaneous/window-averaged Hill drive
    computed by the caller (``f(y1(t))`` when there is no delay).
    """
    x1, y1, x2, y2 = (float(s) for s in state)
    values = (x1, y1, x2, y2, float(delayed_term))
    if not all(math.isfinite(v) for v in values):
        raise DomainError(f"non-finite input to rhs: state={state!r}, delayed_term={delayed_term!r}")
    p = params
    return State(
        1.0 - p.b1 * x1,
        x1 - (p.a1 + p.a12 * y2) * y1,
        delayed_term - p.b2 * x2,
        x2 - (p.a2 + p.a12 * y1) * y2,
    )


def linear_matrices(params: ModelParams, eq) -> LinearPair:
    """Jacobian split into the instantaneous matrix ``A`` and delayed matrix ``B``."""
    p = params
    rho1 = eq.rho1
    A = np.array(
        [
            [-p.b1, 0.0, 0.0, 0.0],
            [1.0, -(p.a1 + p.a12 * eq.y20), 0.0, -p.a12 * eq.y10],
            [0.0, p.alpha * rho1, -p.b2, 0.0],
            [0.0, -p.a12 * eq.y20, 1.0, -(p.a2 + p.a12 * eq.y10)],
        ]
    )
    B = np.zeros((4, 4))
    B[2, 1] = (1.0 - p.alpha) * rho1
    return LinearPair(A, B)
