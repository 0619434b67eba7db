"""Forward simulation with the uniformly distributed delay.

The solver is classical RK4 on a uniform grid.  ``y1`` and its derivative are
kept on a dense record covering ``[-tau, t]`` so the window average

    (1/tau) int_0^tau f(y1(t - s)) ds

is a prefix-sum difference over stored segment integrals plus two partial
segments, each evaluated on the cubic Hermite interpolant.  Segment integrals
use the composite trapezoid rule (``quad_refine`` sub-intervals per step) or
composite Simpson.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numba import njit
from scipy.integrate import solve_ivp

from .equilibrium import Equilibrium
from .errors import DomainError, HistoryUnderflow, NonFiniteState, StepTooLarge
from .model import ModelParams
from .normalform import EigenPair, NormalForm

# integrand selectors for the window quadrature
HILL, IDENTITY = 0, 1


@dataclass(frozen=True)
class HistorySpec:
    """Initial data: scalars for x1, x2, y2 and a profile for y1 on ``[-tau, 0]``.

    ``phi1`` may be a constant, a callable of ``theta`` or a pair
    ``(thetas, values)`` resampled linearly.
    """

    x1_0: float
    x2_0: float
    y2_0: float
    phi1: float | Callable[[np.ndarray], np.ndarray] | tuple[Sequence[float], Sequence[float]]

    def y1_at(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if callable(self.phi1):
            out = np.asarray(self.phi1(theta), dtype=float) * np.ones_like(theta)
        elif isinstance(self.phi1, tuple):
            ts, ys = (np.asarray(v, dtype=float) for v in self.phi1)
            out = np.interp(theta, ts, ys)
        else:
            out = np.full_like(theta, float(self.phi1))
        if np.any(out < 0):
            raise DomainError("history profile for y1 must be nonnegative")
        return out

    @classmethod
    def constant(cls, state) -> "HistorySpec":
        x1, y1, x2, y2 = (float(s) for s in state)
        return cls(x1, x2, y2, y1)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    dt: float
    tau: float

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class DenseRecord:
    """Uniform record of ``y1`` and ``y1'`` starting at time ``t0``."""

    t0: float
    dt: float
    y: np.ndarray
    yp: np.ndarray


def perturbed_history(eq: Equilibrium, rel: float) -> HistorySpec:
    return HistorySpec.constant(eq.as_array() * (1.0 + rel))


# ---------------------------------------------------------------------------
# compiled core


@njit(cache=True, nogil=True)
def _f(x, a, n, mode):
    if mode == IDENTITY:
        return x
    xn = x**n
    return xn / (a + xn)


@njit(cache=True, nogil=True)
def _hermite(y0, yp0, y1, yp1, h, th):
    s = 1.0 - th
    return (1.0 + 2.0 * th) * s * s * y0 + th * s * s * h * yp0 + th * th * (3.0 - 2.0 * th) * y1 - th * th * s * h * yp1


@njit(cache=True, nogil=True)
def _segment(Y, YP, j, dt, lo, hi, a, n, mode, q, simpson):
    """Integral of f(y1) over the fraction [lo, hi] of segment j."""
    if hi <= lo:
        return 0.0
    y0, yp0, y1, yp1 = Y[j], YP[j], Y[j + 1], YP[j + 1]
    width = (hi - lo) * dt
    if simpson:
        m = 2 * q
        acc = 0.0
        for k in range(m + 1):
            th = lo + (hi - lo) * k / m
            wk = 1.0 if (k == 0 or k == m) else (4.0 if k % 2 == 1 else 2.0)
            acc += wk * _f(_hermite(y0, yp0, y1, yp1, dt, th), a, n, mode)
        return acc * width / (3.0 * m)
    if q == 1:
        if lo == 0.0:
            fl = _f(y0, a, n, mode)
        else:
            fl = _f(_hermite(y0, yp0, y1, yp1, dt, lo), a, n, mode)
        if hi == 1.0:
            fh = _f(y1, a, n, mode)
        else:
            fh = _f(_hermite(y0, yp0, y1, yp1, dt, hi), a, n, mode)
        return 0.5 * width * (fl + fh)
    acc = 0.0
    for k in range(q + 1):
        th = lo + (hi - lo) * k / q
        wk = 0.5 if (k == 0 or k == q) else 1.0
        acc += wk * _f(_hermite(y0, yp0, y1, yp1, dt, th), a, n, mode)
    return acc * width / q


@njit(cache=True, nogil=True)
def _lower_part(Y, YP, S, node, u, dt, a, n, mode, q, simpson):
    """Integral from fractional node position u up to node index ``node``."""
    j = int(math.floor(u))
    frac = u - j
    if frac >= 1.0:
        j += 1
        frac = 0.0
    if j >= node:
        return -_segment(Y, YP, node, dt, 0.0, u - node, a, n, mode, q, simpson) if u > node else 0.0
    return _segment(Y, YP, j, dt, frac, 1.0, a, n, mode, q, simpson) + S[node] - S[j + 1]


@njit(cache=True, nogil=True)
def _rk4_kernel(prm, n, x0, Yh, YPh, nsteps, dt, q, simpson, mode):
    a1, a2, a12, b1, b2, a, alpha, tau = prm[0], prm[1], prm[2], prm[3], prm[4], prm[5], prm[6], prm[7]
    K = Yh.shape[0] - 1
    total = K + nsteps + 1
    Y = np.empty(total)
    YP = np.empty(total)
    S = np.zeros(total)
    Y[: K + 1] = Yh
    YP[: K + 1] = YPh
    for j in range(K):
        S[j + 1] = S[j] + _segment(Y, YP, j, dt, 0.0, 1.0, a, n, mode, q, simpson)

    X = np.empty((nsteps + 1, 4))
    X[0] = x0
    YP[K] = x0[0] - (a1 + a12 * x0[3]) * x0[1]
    delayed = tau > 0.0 and alpha < 1.0
    shift = tau / dt if delayed else 0.0
    k = np.empty((4, 4))
    st = np.empty(4)
    cs = (0.0, 0.5, 0.5, 1.0)
    for i in range(nsteps):
        node = K + i
        fn = _f(Y[node], a, n, mode)
        for s in range(4):
            c = cs[s]
            if s == 0:
                for m in range(4):
                    st[m] = X[i, m]
            else:
                for m in range(4):
                    st[m] = X[i, m] + c * dt * k[s - 1, m]
            fs = _f(st[1], a, n, mode)
            if delayed:
                upper = 0.5 * c * dt * (fn + fs)
                lower = _lower_part(Y, YP, S, node, node + c - shift, dt, a, n, mode, q, simpson)
                drive = alpha * fs + (1.0 - alpha) * (upper + lower) / tau
            else:
                drive = fs
            k[s, 0] = 1.0 - b1 * st[0]
            k[s, 1] = st[0] - (a1 + a12 * st[3]) * st[1]
            k[s, 2] = drive - b2 * st[2]
            k[s, 3] = st[2] - (a2 + a12 * st[1]) * st[3]
        ok = True
        for m in range(4):
            X[i + 1, m] = X[i, m] + dt / 6.0 * (k[0, m] + 2.0 * k[1, m] + 2.0 * k[2, m] + k[3, m])
            if not math.isfinite(X[i + 1, m]):
                ok = False
        if not ok:
            return X, i + 1
        Y[node + 1] = X[i + 1, 1]
        YP[node + 1] = X[i + 1, 0] - (a1 + a12 * X[i + 1, 3]) * X[i + 1, 1]
        S[node + 1] = S[node] + _segment(Y, YP, node, dt, 0.0, 1.0, a, n, mode, q, simpson)
    return X, -1


# ---------------------------------------------------------------------------
# public API


def _prefix(rec: DenseRecord, params: ModelParams, mode: int, q: int, simpson: bool) -> np.ndarray:
    S = np.zeros(len(rec.y))
    for j in range(len(rec.y) - 1):
        S[j + 1] = S[j] + _segment(rec.y, rec.yp, j, rec.dt, 0.0, 1.0, params.a, params.n, mode, q, simpson)
    return S


def distributed_term(
    record: DenseRecord,
    t: float,
    params: ModelParams,
    identity: bool = False,
    quad_refine: int = 1,
    simpson: bool = False,
) -> float:
    """Mixed drive ``alpha f(y1(t)) + (1-alpha)/tau int_0^tau f(y1(t-s)) ds`` from a record.

    ``identity=True`` replaces ``f`` by the identity (quadrature test hook).
    """
    p = params
    mode = IDENTITY if identity else HILL
    rec = record
    t_last = rec.t0 + rec.dt * (len(rec.y) - 1)
    if t > t_last + 1e-12 * max(1.0, abs(t_last)) or t - p.tau < rec.t0 - 1e-12 * max(1.0, abs(rec.t0)):
        raise HistoryUnderflow(f"record [{rec.t0}, {t_last}] does not cover [{t - p.tau}, {t}]")

    def y_at(time):
        u = (time - rec.t0) / rec.dt
        j = min(int(math.floor(u)), len(rec.y) - 2)
        return _hermite(rec.y[j], rec.yp[j], rec.y[j + 1], rec.yp[j + 1], rec.dt, u - j)

    f_now = float(_f(y_at(t), p.a, p.n, mode))
    if p.tau == 0.0 or p.alpha == 1.0:
        return f_now
    S = _prefix(rec, p, mode, quad_refine, simpson)
    u_hi = (t - rec.t0) / rec.dt
    node = min(int(math.floor(u_hi)), len(rec.y) - 2)
    integral = _lower_part(rec.y, rec.yp, S, node, u_hi - p.tau / rec.dt, rec.dt, p.a, p.n, mode, quad_refine, simpson)
    integral += _segment(rec.y, rec.yp, node, rec.dt, 0.0, u_hi - node, p.a, p.n, mode, quad_refine, simpson)
    return p.alpha * f_now + (1.0 - p.alpha) * integral / p.tau


def history_record(params: ModelParams, history: HistorySpec, dt: float) -> DenseRecord:
    """Dense ``y1`` record on the history grid, ending at node ``t = 0``."""
    K = int(math.ceil(params.tau / dt)) + 1 if params.tau > 0 else 1
    thetas = dt * np.arange(-K, 1)
    y = history.y1_at(np.clip(thetas, -params.tau, 0.0))
    yp = np.gradient(y, dt) if len(y) > 2 else np.zeros_like(y)
    return DenseRecord(float(thetas[0]), dt, y, yp)


def integrate(
    params: ModelParams,
    history: HistorySpec,
    t_end: float,
    dt: float = 1e-3,
    quad_refine: int = 1,
    simpson: bool = False,
) -> Trajectory:
    """Fixed-step RK4 integration of the full nonlinear system."""
    if t_end <= 0:
        raise DomainError("t_end must be positive")
    if params.tau > 0 and dt > params.tau / 4:
        raise StepTooLarge(f"dt={dt} exceeds tau/4={params.tau / 4}")
    if quad_refine < 1:
        raise DomainError("quad_refine must be >= 1")
    nsteps = int(round(t_end / dt))
    rec = history_record(params, history, dt)
    x0 = np.array([history.x1_0, float(rec.y[-1]), history.x2_0, history.y2_0])
    p = params
    prm = np.array([p.a1, p.a2, p.a12, p.b1, p.b2, p.a, p.alpha, p.tau])
    states, bad = _rk4_kernel(prm, int(p.n), x0, rec.y, rec.yp, nsteps, dt, quad_refine, simpson, HILL)
    if bad >= 0:
        raise NonFiniteState(bad * dt)
    return Trajectory(dt * np.arange(nsteps + 1), states, dt, p.tau)


def y1_record(traj: Trajectory, params: ModelParams, history: HistorySpec) -> DenseRecord:
    """Dense record spanning the history and the computed trajectory."""
    hist = history_record(params, history, traj.dt)
    X = traj.states
    yp = X[:, 0] - (params.a1 + params.a12 * X[:, 3]) * X[:, 1]
    y = np.concatenate([hist.y[:-1], X[:, 1]])
    ypa = np.concatenate([hist.yp[:-1], yp])
    return DenseRecord(hist.t0, traj.dt, y, ypa)


# ---------------------------------------------------------------------------
# long-term behaviour


def envelope(traj: Trajectory, eq: Equilibrium) -> tuple[float, float]:
    """Max of ``|state - eq|`` over the middle and the last third of the run."""
    dev = np.linalg.norm(traj.states - eq.as_array(), axis=1)
    n = len(dev)
    mid = dev[n // 3 : 2 * n // 3]
    last = dev[2 * n // 3 :]
    return float(mid.max()), float(last.max())


ROUNDOFF_FLOOR = 1e-9


def classify_longterm(traj: Trajectory, eq: Equilibrium, floor: float = ROUNDOFF_FLOOR) -> str:
    """``decay``, ``sustained_oscillation``, ``growth`` or ``inconclusive``.

    Envelopes below ``floor * (1 + |eq|)`` are round-off around the
    equilibrium and count as zero; a zero final envelope is decay.
    """
    mid, last = envelope(traj, eq)
    eps = floor * (1.0 + float(np.linalg.norm(eq.as_array())))
    if last <= eps:
        return "decay"
    if mid <= eps:
        return "growth"
    ratio = last / mid
    if ratio < 0.5:
        return "decay"
    if 0.8 <= ratio <= 1.25:
        return "sustained_oscillation"
    if ratio > 2.0:
        return "growth"
    return "inconclusive"


@dataclass(frozen=True)
class ScanRow:
    tau: float
    classification: str
    final_amplitude: float
    error: str | None = None


def _scan_one(params, eq, tau, perturbation, t_end, dt, quad_refine):
    try:
        p = params.with_(tau=float(tau))
        traj = integrate(p, perturbed_history(eq, perturbation), t_end, dt, quad_refine)
        return ScanRow(float(tau), classify_longterm(traj, eq), envelope(traj, eq)[1])
    except Exception as exc:  # per-row failure is reported, not raised
        return ScanRow(float(tau), "error", math.nan, f"{type(exc).__name__}: {exc}")


def scan_threads() -> int:
    raw = os.environ.get("HOPFDDE_THREADS", "")
    if raw.strip():
        return max(1, int(raw))
    return os.cpu_count() or 1


def tau_scan(
    params: ModelParams,
    eq: Equilibrium,
    taus: Sequence[float],
    perturbation: float = 0.01,
    t_end: float = 500.0,
    dt: float = 1e-3,
    quad_refine: int = 1,
    threads: int | None = None,
) -> list[ScanRow]:
    """Independent runs for each delay; rows come back in input order."""
    threads = threads or scan_threads()
    args = [(params, eq, t, perturbation, t_end, dt, quad_refine) for t in taus]
    if threads == 1 or len(args) <= 1:
        return [_scan_one(*a) for a in args]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda a: _scan_one(*a), args))


def switch_points(rows: Sequence[ScanRow]) -> list[tuple[float, float, str]]:
    """Adjacent row pairs where the decay / non-decay status changes.

    Returns ``(tau_left, tau_right, kind)`` with kind ``"onset"`` for
    decay followed by non-decay and ``"recovery"`` for the reverse.  Rows
    that errored count as non-decay.
    """
    out = []
    for left, right in zip(rows, rows[1:]):
        a, b = left.classification == "decay", right.classification == "decay"
        if a != b:
            out.append((left.tau, right.tau, "onset" if a else "recovery"))
    return out


# ---------------------------------------------------------------------------
# analytic waveform from the normal form


def normal_form_rhs(nf: NormalForm, lambda1: complex, shift: complex = 0.0):
    """Reduced equation; ``shift`` adds ``(tau - tau0) dlam/dtau`` to the linear rate off criticality."""
    lam = lambda1 + shift

    def rhs(_t, z):
        zc = np.conj(z)
        return lam * z + nf.g20 * z * z / 2 + nf.g11 * z * zc + nf.g02 * zc * zc / 2 + nf.g21 * z * z * zc / 2

    return rhs


def integrate_normal_form(
    nf: NormalForm, lambda1: complex, z0: complex, t_end: float, dt: float, shift: complex = 0.0
):
    """Solve the reduced equation for ``z(t)`` on a uniform output grid.

    If the solution escapes (a subcritical form above criticality) the
    returned arrays stop at the last time the solver reached.
    """
    times = dt * np.arange(int(round(t_end / dt)) + 1)
    sol = solve_ivp(
        normal_form_rhs(nf, lambda1, shift), (0.0, times[-1]), [complex(z0)], method="DOP853",
        t_eval=times, rtol=1e-10, atol=1e-14,
    )
    return sol.t, sol.y[0]


def analytic_waveform(nf: NormalForm, pair: EigenPair, eq: Equilibrium, times, z_path, return_complex=False):
    """State ``X(t) = z v + conj(z v) + w20 z^2/2 + w11 |z|^2 + conj(w20) conj(z)^2/2 + X0``."""
    z = np.asarray(z_path, dtype=complex)[:, None]
    v = pair.v[None, :]
    w20, w11 = nf.w20_0[None, :], nf.w11_0[None, :]
    X = z * v + np.conj(z * v) + 0.5 * w20 * z**2 + w11 * z * np.conj(z) + 0.5 * np.conj(w20) * np.conj(z) ** 2
    X = X + eq.as_array()[None, :]
    times = np.asarray(times, dtype=float)
    dt = float(times[1] - times[0]) if len(times) > 1 else 0.0
    traj = Trajectory(times, X.real.copy(), dt, float("nan"))
    if return_complex:
        return traj, X
    return traj


# ---------------------------------------------------------------------------
# export


def write_trajectory_csv(traj: Trajectory, path, decimation: int = 1) -> int:
    """Write ``t,x1,y1,x2,y2`` rows; returns the number of data rows."""
    if decimation < 1:
        raise DomainError("decimation must be >= 1")
    idx = np.arange(0, len(traj.times), decimation)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "x1", "y1", "x2", "y2"])
        for i in idx:
            writer.writerow([f"{traj.times[i]:.10g}"] + [f"{v:.12g}" for v in traj.states[i]])
    return len(idx)
