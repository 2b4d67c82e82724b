"""Experiment configuration: a flat `section.key = value` text format.

Zero-dependency on purpose: one assignment per line, `#` starts a comment,
lists are comma-separated. The format is diff-friendly so configs double as
experiment provenance.  Loading re-checks every module-level invariant, so a
config that loads is a config that runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from .averaging import ProbeConfig
from .controllers import EsParams, assemble
from .errors import AssemblyError, ConfigError
from .maps import CostMap, named_map
from .schedules import ASYMPTOTIC, EXPONENTIAL, NOMINAL, Schedule
from .sim import STEPS_PER_PERIOD

Array = np.ndarray

_REQUIRED = object()


def parse_kv_text(text: str, source: str = "<config>") -> dict:
    """Raw key -> value-string mapping; duplicate or malformed lines are errors."""
    data = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'section.key = value', got '{raw.strip()}'")
        key, val = (part.strip() for part in line.split("=", 1))
        if not key or "." not in key:
            raise ConfigError(f"{source}:{lineno}: key '{key}' must look like 'section.key'")
        if key in data:
            raise ConfigError(f"{source}:{lineno}: duplicate key '{key}'")
        if not val:
            raise ConfigError(f"{source}:{lineno}: key '{key}' has no value")
        data[key] = val
    return data


class _Reader:
    """Typed, consumption-tracking view over the raw key/value dict."""

    def __init__(self, data: dict, source: str):
        self.data = data
        self.source = source
        self.seen = set()

    def _raw(self, key: str, default):
        self.seen.add(key)
        if key in self.data:
            return self.data[key]
        if default is _REQUIRED:
            raise ConfigError(f"{self.source}: missing required key '{key}'")
        return None

    def has(self, key: str) -> bool:
        return key in self.data

    def str_(self, key: str, default=_REQUIRED):
        raw = self._raw(key, default)
        return default if raw is None else raw

    def float_(self, key: str, default=_REQUIRED):
        raw = self._raw(key, default)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{self.source}: key '{key}': '{raw}' is not a number") from None

    def int_(self, key: str, default=_REQUIRED):
        raw = self._raw(key, default)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{self.source}: key '{key}': '{raw}' is not an integer") from None

    def list_(self, key: str, default=_REQUIRED):
        raw = self._raw(key, default)
        if raw is None:
            return default
        try:
            return [float(part) for part in raw.split(",")]
        except ValueError:
            raise ConfigError(f"{self.source}: key '{key}': '{raw}' is not a comma-separated number list") from None

    def reject_unknown(self):
        unknown = sorted(set(self.data) - self.seen)
        if unknown:
            raise ConfigError(f"{self.source}: unknown key(s): {', '.join(unknown)}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully validated experiment: everything the CLI verbs need to run."""

    name: str
    map: CostMap
    params: EsParams
    theta0: Array
    eta0: float
    dt: float
    horizon: float
    record_every: int
    fit_window: Optional[Tuple[float, float]]
    tail_fraction: float
    probe: Optional[ProbeConfig]
    out_dir: str


def _build_schedule(r: _Reader) -> Schedule:
    kind = r.str_("schedule.kind")
    t0 = r.float_("schedule.t0", 0.0)
    try:
        if kind == NOMINAL:
            return Schedule.nominal(t0=t0)
        if kind == ASYMPTOTIC:
            return Schedule.asymptotic(
                beta=r.float_("schedule.beta"), v=r.float_("schedule.v"), r=r.float_("schedule.r"), t0=t0
            )
        if kind == EXPONENTIAL:
            return Schedule.exponential(lam=r.float_("schedule.lambda"), t0=t0)
    except ValueError as e:
        raise ConfigError(f"{r.source}: schedule.*: {e}") from None
    raise ConfigError(f"{r.source}: schedule.kind must be nominal, asymptotic, or exponential, got '{kind}'")


def _build_map(r: _Reader) -> CostMap:
    name = r.str_("map.name")
    kwargs = {}
    if name == "quadratic":
        q = r.list_("map.q", None)
        star = r.list_("map.theta_star", None)
        if q is not None:
            kwargs["q"] = q
        if star is not None:
            kwargs["theta_star"] = star
    else:
        for key in ("map.q", "map.theta_star"):
            if r.has(key):
                raise ConfigError(f"{r.source}: key '{key}' only applies to the quadratic map")
    try:
        return named_map(name, **kwargs)
    except ValueError as e:
        raise ConfigError(f"{r.source}: map.*: {e}") from None


def _build_probe(r: _Reader) -> Optional[ProbeConfig]:
    group = ("probe.omegas", "probe.epsilon", "probe.delta", "probe.horizon", "probe.trials", "probe.seed")
    present = [key for key in group if r.has(key)]
    if not present:
        for key in group:
            r.seen.add(key)
        return None
    try:
        return ProbeConfig(
            omega_values=tuple(r.list_("probe.omegas")),
            epsilon=r.float_("probe.epsilon"),
            delta=r.float_("probe.delta"),
            horizon=r.float_("probe.horizon"),
            trials=r.int_("probe.trials"),
            seed=r.int_("probe.seed", 0),
        )
    except ValueError as e:
        raise ConfigError(f"{r.source}: probe.*: {e}") from None


def config_from_text(text: str, name: str, source: str = "<config>") -> ExperimentConfig:
    r = _Reader(parse_kv_text(text, source), source)

    map_ = _build_map(r)
    schedule = _build_schedule(r)

    alpha = r.list_("es.alpha", [1.0])
    k = r.list_("es.k", _REQUIRED)
    omega = r.float_("es.omega")
    omega_h = r.float_("es.omega_h")
    omega_hat = r.list_("es.omega_hat", None)
    try:
        params = assemble(
            map_, schedule,
            alpha=alpha[0] if len(alpha) == 1 else alpha,
            k=k[0] if len(k) == 1 else k,
            omega=omega, omega_h=omega_h, omega_hat=omega_hat,
        )
    except AssemblyError as e:
        raise ConfigError(f"{r.source}: es.*: {e}") from None

    theta0 = np.asarray(r.list_("es.theta0", [0.0] * map_.dim), dtype=float)
    if theta0.shape != (map_.dim,):
        raise ConfigError(f"{r.source}: es.theta0 must list {map_.dim} value(s), got {theta0.size}")
    eta0 = r.float_("es.eta0", 0.0)

    horizon = r.float_("sim.horizon")
    if horizon <= 0.0:
        raise ConfigError(f"{r.source}: sim.horizon must be positive, got {horizon}")
    dt_max = (2.0 * math.pi / float(np.max(params.omegas))) / STEPS_PER_PERIOD
    dt = r.float_("sim.dt", dt_max)
    if dt <= 0.0 or dt > dt_max * (1.0 + 1e-12):
        raise ConfigError(
            f"{r.source}: sim.dt = {dt:g} must lie in (0, {dt_max:g}] "
            f"({STEPS_PER_PERIOD} steps per fastest dither period)"
        )
    record_every = r.int_("sim.record_every", 1)
    if record_every < 1:
        raise ConfigError(f"{r.source}: sim.record_every must be >= 1, got {record_every}")

    window = r.list_("analysis.fit_window", None)
    if window is not None:
        if len(window) != 2 or window[1] <= window[0]:
            raise ConfigError(f"{r.source}: analysis.fit_window needs two values 'start, end' with end > start")
        window = (window[0], window[1])
    tail_fraction = r.float_("analysis.tail_fraction", 0.2)
    if not (0.0 < tail_fraction <= 1.0):
        raise ConfigError(f"{r.source}: analysis.tail_fraction must lie in (0, 1], got {tail_fraction}")

    probe = _build_probe(r)
    out_dir = r.str_("out.dir", "out")
    r.reject_unknown()

    return ExperimentConfig(
        name=name, map=map_, params=params, theta0=theta0, eta0=eta0,
        dt=dt, horizon=horizon, record_every=record_every,
        fit_window=window, tail_fraction=tail_fraction, probe=probe, out_dir=out_dir,
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config '{path}': {e.strerror or e}") from None
    return config_from_text(text, name=path.stem, source=str(path))
