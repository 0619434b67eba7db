"""JSON run configuration.

Layout::

    {
      "params":      {"a1": 0.13, ..., "alpha": 0.2, "tau": 0.0},
      "equilibrium": {"tol": 1e-12},
      "stability":   {"grid_size": 4000},
      "normalform":  {"variant": "published"},
      "simulate":    {"dt": 0.001, "t_end": 500, "perturbation": 0.01,
                      "decimation": 10, "overlay": false,
                      "tau": null, "tau_factor": null},
      "scan":        {"tau_range": [lo, hi, steps]  or  "tau_factor_range": [lo, hi, steps],
                      "t_end": 500, "dt": 0.001, "perturbation": 0.01}
    }

Every section and field is optional; omitted values take the defaults
below.  The simulated delay is ``simulate.tau`` if given, otherwise
``simulate.tau_factor`` times the critical delay, otherwise ``params.tau``.  Unknown keys are rejected so typos do not pass silently.  Errors
name the offending field and, where it can be located, its line.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

from .errors import ConfigError, DomainError
from .model import REFERENCE_PARAMS, ModelParams
from .normalform import VARIANTS


@dataclass(frozen=True)
class SimulateOptions:
    dt: float = 1e-3
    t_end: float = 500.0
    perturbation: float = 0.01
    decimation: int = 10
    overlay: bool = False
    tau: float | None = None
    tau_factor: float | None = None


@dataclass(frozen=True)
class ScanOptions:
    tau_range: tuple[float, float, int] | None = None
    tau_factor_range: tuple[float, float, int] | None = (0.2, 2.0, 40)
    t_end: float = 500.0
    dt: float = 1e-3
    perturbation: float = 0.01


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams = REFERENCE_PARAMS
    tol: float = 1e-12
    grid_size: int = 4000
    variant: str = "published"
    simulate: SimulateOptions = field(default_factory=SimulateOptions)
    scan: ScanOptions = field(default_factory=ScanOptions)

    @property
    def is_reference_default(self) -> bool:
        """True when the model parameters are the published example's."""
        return self.params.with_(tau=0.0) == REFERENCE_PARAMS


def _line_of(text: str, key: str) -> int | None:
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else None


class _Reader:
    def __init__(self, text: str):
        self.text = text

    def fail(self, path: str, msg: str):
        raise ConfigError(msg, field=path, line=_line_of(self.text, path.rsplit(".", 1)[-1]))

    def section(self, data: dict, name: str, allowed: set[str]) -> dict:
        sec = data.get(name, {})
        if not isinstance(sec, dict):
            self.fail(name, "must be an object")
        for key in sec:
            if key not in allowed:
                self.fail(f"{name}.{key}", f"unknown key; expected one of {sorted(allowed)}")
        return sec

    def number(self, sec: dict, name: str, key: str, default, lo=None, hi=None, lo_open=False, allow_none=False):
        path = f"{name}.{key}"
        if key not in sec:
            return default
        v = sec[key]
        if v is None and allow_none:
            return None
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            self.fail(path, f"expected a finite number, got {v!r}")
        if lo is not None and (v <= lo if lo_open else v < lo):
            self.fail(path, f"{v!r} must be {'>' if lo_open else '>='} {lo}")
        if hi is not None and v > hi:
            self.fail(path, f"{v!r} must be <= {hi}")
        return float(v)

    def integer(self, sec: dict, name: str, key: str, default, lo=None):
        path = f"{name}.{key}"
        if key not in sec:
            return default
        v = sec[key]
        if isinstance(v, bool) or not isinstance(v, int):
            self.fail(path, f"expected an integer, got {v!r}")
        if lo is not None and v < lo:
            self.fail(path, f"{v!r} must be >= {lo}")
        return v

    def triple(self, sec: dict, name: str, key: str, default):
        path = f"{name}.{key}"
        if key not in sec:
            return default
        v = sec[key]
        if v is None:
            return None
        if not (isinstance(v, list) and len(v) == 3):
            self.fail(path, "expected [lo, hi, steps]")
        lo, hi, steps = v
        for x in (lo, hi):
            if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
                self.fail(path, f"bounds must be finite numbers, got {x!r}")
        if isinstance(steps, bool) or not isinstance(steps, int) or steps < 1:
            self.fail(path, f"steps must be a positive integer, got {steps!r}")
        if lo < 0 or hi < lo:
            self.fail(path, f"need 0 <= lo <= hi, got lo={lo!r}, hi={hi!r}")
        return float(lo), float(hi), steps


_PARAM_NAMES = {f.name for f in fields(ModelParams)}


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration document."""
    try:
        data = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} (column {exc.colno})", line=exc.lineno) from None
    if not isinstance(data, dict):
        raise ConfigError("top level must be a JSON object", line=1)
    r = _Reader(text)
    sections = {"params", "equilibrium", "stability", "normalform", "simulate", "scan"}
    for key in data:
        if key not in sections:
            r.fail(key, f"unknown section; expected one of {sorted(sections)}")

    raw = r.section(data, "params", _PARAM_NAMES)
    values = REFERENCE_PARAMS.as_dict()
    for key, v in raw.items():
        if key == "n":
            if isinstance(v, bool) or not isinstance(v, int):
                r.fail("params.n", f"Hill exponent must be an integer, got {v!r}")
        elif isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            r.fail(f"params.{key}", f"expected a finite number, got {v!r}")
        values[key] = v if key == "n" else float(v)
    try:
        params = ModelParams(**values)
    except DomainError as exc:
        bad = str(exc).split("=", 1)[0]
        r.fail(f"params.{bad}", str(exc))

    eq_sec = r.section(data, "equilibrium", {"tol"})
    tol = r.number(eq_sec, "equilibrium", "tol", 1e-12, lo=1e-14, hi=1e-6)

    st = r.section(data, "stability", {"grid_size"})
    grid_size = r.integer(st, "stability", "grid_size", 4000, lo=100)

    nf = r.section(data, "normalform", {"variant"})
    variant = nf.get("variant", "published")
    if variant not in VARIANTS:
        r.fail("normalform.variant", f"{variant!r} not in {list(VARIANTS)}")

    sim = r.section(data, "simulate", {f.name for f in fields(SimulateOptions)})
    overlay = sim.get("overlay", False)
    if not isinstance(overlay, bool):
        r.fail("simulate.overlay", f"expected true/false, got {overlay!r}")
    simulate = SimulateOptions(
        dt=r.number(sim, "simulate", "dt", 1e-3, lo=0.0, lo_open=True),
        t_end=r.number(sim, "simulate", "t_end", 500.0, lo=0.0, lo_open=True),
        perturbation=r.number(sim, "simulate", "perturbation", 0.01, lo=-1.0, lo_open=True, hi=10.0),
        decimation=r.integer(sim, "simulate", "decimation", 10, lo=1),
        overlay=overlay,
        tau=r.number(sim, "simulate", "tau", None, lo=0.0, allow_none=True),
        tau_factor=r.number(sim, "simulate", "tau_factor", None, lo=0.0, allow_none=True),
    )

    sc = r.section(data, "scan", {f.name for f in fields(ScanOptions)})
    tau_range = r.triple(sc, "scan", "tau_range", None)
    factor_range = r.triple(sc, "scan", "tau_factor_range", None if tau_range else (0.2, 2.0, 40))
    if tau_range is not None and factor_range is not None:
        r.fail("scan.tau_range", "give either tau_range or tau_factor_range, not both")
    scan = ScanOptions(
        tau_range=tau_range,
        tau_factor_range=factor_range,
        t_end=r.number(sc, "scan", "t_end", 500.0, lo=0.0, lo_open=True),
        dt=r.number(sc, "scan", "dt", 1e-3, lo=0.0, lo_open=True),
        perturbation=r.number(sc, "scan", "perturbation", 0.01, lo=-1.0, lo_open=True, hi=10.0),
    )
    return RunConfig(params, tol, grid_size, variant, simulate, scan)


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)


def config_to_dict(cfg: RunConfig) -> dict[str, Any]:
    """Inverse of :func:`parse_config`, for echoing the effective configuration."""
    sim, sc = cfg.simulate, cfg.scan
    return {
        "params": cfg.params.as_dict(),
        "equilibrium": {"tol": cfg.tol},
        "stability": {"grid_size": cfg.grid_size},
        "normalform": {"variant": cfg.variant},
        "simulate": {f.name: getattr(sim, f.name) for f in fields(sim)},
        "scan": {
            **({"tau_range": list(sc.tau_range)} if sc.tau_range else {}),
            **({"tau_factor_range": list(sc.tau_factor_range)} if sc.tau_factor_range else {}),
            "t_end": sc.t_end,
            "dt": sc.dt,
            "perturbation": sc.perturbation,
        },
    }
