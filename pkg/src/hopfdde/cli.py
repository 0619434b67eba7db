"""Command-line front end.

    hopfdde <equilibrium|stability|normalform|simulate|scan> --config PATH
            [--out-prefix PREFIX] [--pretty]

Reports go to stdout as JSON (``--pretty`` renders them as indented text);
CSV and SVG files are written next to ``--out-prefix``.  Exit status is 0 on
success, 1 for configuration errors and 2 for numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path
from typing import Any

import numpy as np

from .config import RunConfig, config_to_dict, load_config
from .equilibrium import Equilibrium, find_equilibrium
from .errors import ConfigError, HopfDDEError, StepTooLarge
from .model import ModelParams
from .normalform import VARIANTS, NormalForm, eigenpair, normal_form
from .reference import REFERENCE_HOPF_PAIR, REFERENCE_NORMAL_FORM
from .simulate import (
    analytic_waveform,
    classify_longterm,
    envelope,
    integrate,
    integrate_normal_form,
    perturbed_history,
    scan_threads,
    switch_points,
    tau_scan,
    write_trajectory_csv,
)
from .stability import (
    CharCoeffs,
    HopfPoint,
    HopfSearch,
    char_coeffs,
    char_delta,
    char_delta_dlambda,
    char_delta_dtau,
    find_hopf_points,
    g1,
    transversality,
    zero_delay_roots,
    zero_delay_stable,
)
from .svg import Series, line_plot

COMMANDS = ("equilibrium", "stability", "normalform", "simulate", "scan")
NO_DELAY_HOPF = "no delay-induced Hopf (h=0)"


class NumericalFailure(Exception):
    """Raised with a partially filled report; maps to exit status 2."""

    def __init__(self, message: str, report: dict):
        super().__init__(message)
        self.report = report


# ---------------------------------------------------------------------------
# JSON helpers


def jsonable(obj: Any) -> Any:
    """Convert numpy scalars/arrays and complex numbers; non-finite floats become null."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": jsonable(float(obj.real)), "im": jsonable(float(obj.imag))}
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def render_pretty(obj: Any, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v and not _is_scalar_list(v):
                lines.append(f"{pad}{k}:")
                lines.append(render_pretty(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_scalar(v)}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, (dict, list)) and not _is_scalar_list(v):
                lines.append(f"{pad}-")
                lines.append(render_pretty(v, indent + 1))
            else:
                lines.append(f"{pad}- {_scalar(v)}")
    else:
        lines.append(pad + _scalar(obj))
    return "\n".join(lines)


def _is_scalar_list(v) -> bool:
    return isinstance(v, list) and all(not isinstance(x, (dict, list)) for x in v)


def _scalar(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    if isinstance(v, dict) and set(v) == {"re", "im"}:
        return f"{_scalar(v['re'])} {'-' if (v['im'] or 0) < 0 else '+'} {_scalar(abs(v['im'] or 0.0))}i"
    if isinstance(v, list):
        return "[" + ", ".join(_scalar(x) for x in v) + "]"
    if v is None:
        return "n/a"
    return str(v)


# ---------------------------------------------------------------------------
# shared pipeline pieces


def _equilibrium_dict(eq: Equilibrium) -> dict:
    return {
        "x10": eq.x10, "y10": eq.y10, "x20": eq.x20, "y20": eq.y20,
        "rho1": eq.rho1, "rho2": eq.rho2, "rho3": eq.rho3, "residual": eq.residual,
    }


def _hopf_dict(hp: HopfPoint, coeffs: CharCoeffs) -> dict:
    lam = 1j * hp.omega0
    dlam = -char_delta_dtau(lam, hp.tau0, coeffs) / char_delta_dlambda(lam, hp.tau0, coeffs)
    return {
        "omega0": hp.omega0,
        "tau0": hp.tau0,
        "residual_sin": hp.residual_sin,
        "residual_cos": hp.residual_cos,
        "abs_delta": hp.delta_abs,
        "g1_mismatch": abs(hp.tau0 - g1(hp.omega0, coeffs)),
        "M1": hp.M1,
        "M2": hp.M2,
        "M": hp.M,
        "N": hp.N,
        "dlambda_dtau": complex(dlam),
        "simple": hp.simple,
        "transversal": hp.transversal,
        "newton_iterations": hp.iterations,
    }


def _analyze(cfg: RunConfig) -> tuple[Equilibrium, CharCoeffs, HopfSearch | None]:
    eq = find_equilibrium(cfg.params, tol=cfg.tol)
    coeffs = char_coeffs(cfg.params, eq)
    search = find_hopf_points(coeffs, cfg.grid_size) if coeffs.h > 0.0 else None
    return eq, coeffs, search


def _critical(cfg: RunConfig, report: dict) -> tuple[Equilibrium, CharCoeffs, HopfPoint]:
    eq, coeffs, search = _analyze(cfg)
    report["equilibrium"] = _equilibrium_dict(eq)
    if search is None:
        raise NumericalFailure(NO_DELAY_HOPF, report)
    if search.critical is None:
        report["rejected_candidates"] = search.rejected
        raise NumericalFailure(f"no Hopf point: {search.candidates} candidate(s), all rejected", report)
    report["tau0"] = search.critical.tau0
    report["omega0"] = search.critical.omega0
    return eq, coeffs, search.critical


def _nf_dict(nf: NormalForm) -> dict:
    return {
        "g20": nf.g20, "g11": nf.g11, "g02": nf.g02, "g21": nf.g21, "C1": nf.C1,
        "mu2": nf.mu2, "beta2": nf.beta2, "T2": nf.T2,
        "direction": nf.direction, "orbit_stability": nf.orbit_stability, "period_trend": nf.period_trend,
        "E1": nf.E1, "E2": nf.E2, "k": nf.k,
        "statements": classification_sentences(nf),
    }


def classification_sentences(nf: NormalForm) -> list[str]:
    side = ">" if nf.mu2 > 0 else "<"
    return [
        f"mu2 {'>' if nf.mu2 > 0 else '<='} 0: the Hopf bifurcation is {nf.direction}; "
        f"bifurcating periodic solutions exist for tau {side} tau0",
        f"beta2 {'<' if nf.beta2 < 0 else '>='} 0: the bifurcating periodic solutions are orbitally {nf.orbit_stability}",
        f"T2 {'>' if nf.T2 > 0 else '<='} 0: the period {'increases' if nf.T2 > 0 else 'decreases'} with tau",
    ]


def _reference_comparison(params: ModelParams, eq: Equilibrium, coeffs: CharCoeffs) -> dict:
    """Pipeline evaluated at the published (omega, tau) pair, next to the published numbers."""
    omega, tau = REFERENCE_HOPF_PAIR
    out: dict[str, Any] = {
        "pair": {"omega": omega, "tau": tau},
        "abs_delta_at_pair": abs(char_delta(1j * omega, tau, coeffs)),
        "note": "informational only: the published pair is not a root of the characteristic function",
        "published": REFERENCE_NORMAL_FORM,
        "computed": {},
    }
    M, N, M1, M2 = transversality(HopfPoint(omega, tau), coeffs)
    hp = HopfPoint(omega, tau, M1=M1, M2=M2, M=M, N=N)
    for variant in VARIANTS:
        try:
            nf = normal_form(params, eq, hp, variant)
        except HopfDDEError as exc:
            out["computed"][variant] = {"error": f"{type(exc).__name__}: {exc}"}
            continue
        row = {}
        for key, ref in REFERENCE_NORMAL_FORM.items():
            val = getattr(nf, key)
            row[key] = val
            row[f"{key}_rel_dev"] = abs(val - ref) / abs(ref)
        out["computed"][variant] = row
    return out


# ---------------------------------------------------------------------------
# commands


def cmd_equilibrium(cfg: RunConfig, prefix: str) -> dict:
    eq = find_equilibrium(cfg.params, tol=cfg.tol)
    return {
        "equilibrium": _equilibrium_dict(eq),
        "certificate": {"max_abs_residual": eq.residual, "ok": eq.residual < 1e-9},
    }


def cmd_stability(cfg: RunConfig, prefix: str) -> dict:
    eq, coeffs, search = _analyze(cfg)
    roots = zero_delay_roots(coeffs)
    rh = zero_delay_stable(coeffs)
    report: dict[str, Any] = {
        "equilibrium": _equilibrium_dict(eq),
        "coefficients": {"b": coeffs.b, "c": coeffs.c, "d": coeffs.d, "h": coeffs.h},
        "zero_delay": {
            "verdict": "stable at tau=0" if rh else "unstable at tau=0",
            "cb_minus_d_minus_h": coeffs.c * coeffs.b - coeffs.d - coeffs.h,
            "roots": [complex(r) for r in roots],
            "roots_agree": bool(np.all(roots.real < 0) == rh),
        },
    }
    if search is None:
        report["hopf"] = {"status": NO_DELAY_HOPF, "points": []}
        return report
    report["hopf"] = {
        "status": "found" if search.points else "none",
        "candidates": search.candidates,
        "points": [_hopf_dict(p, coeffs) for p in search.points],
        "rejected": [{"omega": w, "tau": t, "reason": why} for w, t, why in search.rejected],
        "tau0": search.critical.tau0 if search.critical else None,
    }
    if search.candidates and not search.points:
        raise NumericalFailure("refinement failed for every Hopf candidate", report)
    return report


def cmd_normalform(cfg: RunConfig, prefix: str) -> dict:
    report: dict[str, Any] = {"selected_variant": cfg.variant}
    if cfg.is_reference_default:
        eq = find_equilibrium(cfg.params, tol=cfg.tol)
        report["reference_comparison"] = _reference_comparison(cfg.params, eq, char_coeffs(cfg.params, eq))
    eq, coeffs, hp = _critical(cfg, report)
    report["hopf"] = _hopf_dict(hp, coeffs)
    variants = {v: normal_form(cfg.params, eq, hp, v) for v in VARIANTS}
    report["variants"] = {v: _nf_dict(nf) for v, nf in variants.items()}
    chosen = variants[cfg.variant]
    report["mu2"], report["beta2"], report["T2"] = chosen.mu2, chosen.beta2, chosen.T2
    report["statements"] = classification_sentences(chosen)
    return report


def _simulation_tau(cfg: RunConfig, report: dict):
    sim = cfg.simulate
    if sim.tau is not None:
        return sim.tau, None
    if sim.tau_factor is not None:
        eq, coeffs, hp = _critical(cfg, report)
        return sim.tau_factor * hp.tau0, (eq, coeffs, hp)
    return cfg.params.tau, None


def cmd_simulate(cfg: RunConfig, prefix: str) -> dict:
    sim = cfg.simulate
    report: dict[str, Any] = {}
    tau, hopf = _simulation_tau(cfg, report)
    params = cfg.params.with_(tau=tau)
    eq = find_equilibrium(params, tol=cfg.tol)
    traj = integrate(params, perturbed_history(eq, sim.perturbation), sim.t_end, sim.dt)

    csv_path = Path(f"{prefix}_trajectory.csv")
    rows = write_trajectory_csv(traj, csv_path, sim.decimation)
    step = sim.decimation
    t = traj.times[::step]
    series = {1: [Series("y1 (simulated)", t, traj.states[::step, 1])], 3: [Series("y2 (simulated)", t, traj.states[::step, 3])]}

    if sim.overlay:
        if hopf is None and cfg.params.alpha < 1.0:
            try:
                hopf = _critical(cfg, {})
            except NumericalFailure:
                hopf = None
        if hopf is None:
            report["overlay"] = "skipped: no Hopf point"
        else:
            _, coeffs, hp = hopf
            # the equilibrium does not depend on tau
            pair = eigenpair(cfg.params, eq, hp, cfg.variant)
            nf = normal_form(cfg.params, eq, hp, cfg.variant, pair=pair)
            lam = 1j * hp.omega0
            dlam = -char_delta_dtau(lam, hp.tau0, coeffs) / char_delta_dlambda(lam, hp.tau0, coeffs)
            z0 = eq.y10 * sim.perturbation / (2.0 * pair.v[1])
            times, z = integrate_normal_form(nf, pair.lambda1, z0, sim.t_end, sim.dt * step, shift=(tau - hp.tau0) * dlam)
            wave = analytic_waveform(nf, pair, eq, times, z)
            series[1].append(Series(f"normal form ({cfg.variant})", times, wave.states[:, 1], dashed=True))
            series[3].append(Series(f"normal form ({cfg.variant})", times, wave.states[:, 3], dashed=True))
            report["overlay"] = {"variant": cfg.variant, "z0": complex(z0), "t_reached": float(times[-1])}
            if times[-1] < sim.t_end - sim.dt * step:
                report["overlay"]["note"] = "reduced equation escaped before t_end"

    files = [str(csv_path)]
    for comp, name in ((1, "y1"), (3, "y2")):
        path = Path(f"{prefix}_{name}.svg")
        path.write_text(line_plot(series[comp], title=f"{name}(t), tau = {tau:.6g}", xlabel="t", ylabel=name))
        files.append(str(path))

    mid, last = envelope(traj, eq)
    report.update(
        {
            "tau": tau,
            "equilibrium": _equilibrium_dict(eq),
            "steps": len(traj.times) - 1,
            "csv_rows": rows,
            "files": files,
            "envelope": {"middle_third": mid, "last_third": last},
            "footer": {"classification": classify_longterm(traj, eq)},
        }
    )
    return report


def cmd_scan(cfg: RunConfig, prefix: str) -> dict:
    sc = cfg.scan
    report: dict[str, Any] = {}
    tau0 = None
    if sc.tau_range is not None:
        lo, hi, steps = sc.tau_range
    elif sc.tau_factor_range is not None:
        eq0, coeffs, hp = _critical(cfg, report)
        tau0 = hp.tau0
        lo, hi, steps = sc.tau_factor_range[0] * tau0, sc.tau_factor_range[1] * tau0, sc.tau_factor_range[2]
    else:
        raise ConfigError("scan needs tau_range or tau_factor_range", field="scan")
    taus = np.linspace(lo, hi, steps) if steps > 1 else np.array([lo])
    eq = find_equilibrium(cfg.params, tol=cfg.tol)
    threads = scan_threads()
    rows = tau_scan(cfg.params, eq, taus, sc.perturbation, sc.t_end, sc.dt, threads=threads)

    path = Path(f"{prefix}_scan.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tau", "classification", "final_amplitude"])
        for r in rows:
            amp = "" if r.error or not math.isfinite(r.final_amplitude) else f"{r.final_amplitude:.10g}"
            writer.writerow([f"{r.tau:.10g}", r.classification, amp])

    report.update(
        {
            "tau0": tau0,
            "threads": threads,
            "rows": [{"tau": r.tau, "classification": r.classification, "final_amplitude": r.final_amplitude, "error": r.error} for r in rows],
            "switches": [{"tau_left": a, "tau_right": b, "kind": k} for a, b, k in switch_points(rows)],
            "files": [str(path)],
        }
    )
    if rows and all(r.error for r in rows):
        raise NumericalFailure("every scan row failed", report)
    return report


HANDLERS = {
    "equilibrium": cmd_equilibrium,
    "stability": cmd_stability,
    "normalform": cmd_normalform,
    "simulate": cmd_simulate,
    "scan": cmd_scan,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hopfdde", description="Hopf bifurcation analysis of the distributed-delay p53-mdm2 model")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON configuration file")
    ap.add_argument("--out-prefix", default="hopfdde", help="prefix for CSV/SVG outputs (default: hopfdde)")
    ap.add_argument("--pretty", action="store_true", help="human-readable report instead of JSON")
    return ap


def _emit(report: dict, pretty: bool, stream) -> None:
    data = jsonable(report)
    stream.write((render_pretty(data) if pretty else json.dumps(data, allow_nan=False)) + "\n")


def main(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        stderr.write(f"hopfdde: configuration error: {exc}\n")
        return 1

    base = {"command": args.command, "config": config_to_dict(cfg)}
    try:
        report = HANDLERS[args.command](cfg, args.out_prefix)
    except (ConfigError, StepTooLarge) as exc:
        stderr.write(f"hopfdde: configuration error: {exc}\n")
        return 1
    except NumericalFailure as exc:
        _emit({**base, **exc.report, "status": "failed", "error": str(exc)}, args.pretty, stdout)
        stderr.write(f"hopfdde: {exc}\n")
        return 2
    except HopfDDEError as exc:
        _emit({**base, "status": "failed", "error": f"{type(exc).__name__}: {exc}"}, args.pretty, stdout)
        stderr.write(f"hopfdde: {type(exc).__name__}: {exc}\n")
        return 2
    _emit({**base, **report, "status": "ok"}, args.pretty, stdout)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
