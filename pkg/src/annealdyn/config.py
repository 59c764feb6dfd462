"""Run configuration: a single JSON document, validated field by field.

Example::

    {
      "model": [[3, 1.0], [14, 1.0]],
      "schedule": {"kind": "anneal", "tau": 100},
      "grid": {"dt": 0.04},
      "solver": "keldysh",
      "sweep": [{"tau": 12.5, "dt": 0.025}, 25, 50, 100, 200],
      "fit": {"min_points": 4, "tau_min": null, "tau_max": null},
      "oracle": {"n_spins": 128, "n_samples": 100, "base_seed": 0, "dt": 0.01, "t_max": 5},
      "output_dir": "runs/qa_mixed",
      "memory_cap_bytes": 3221225472
    }

``schedule.s0`` may be a list for two-stage sweeps, which then scan ``s0``.
"""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .fields import DEFAULT_MEMORY_CAP, grid_bytes
from .model import MixtureSpec
from .schedule import Schedule, ScheduleKind, TimeGrid

SOLVERS = ("langevin", "keldysh")
KNOWN_KEYS = {"model", "schedule", "grid", "solver", "sweep", "fit", "oracle",
              "output_dir", "memory_cap_bytes", "threads", "dump_kernels"}
# keys that change where or how fast a run happens but not its numbers
EXECUTION_KEYS = {"output_dir", "memory_cap_bytes", "threads", "dump_kernels"}


@dataclass(frozen=True)
class SweepPoint:
    tau: float
    dt: float

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid.for_tau(self.tau, self.dt)


@dataclass(frozen=True)
class OracleParams:
    n_spins: int = 128
    n_samples: int = 100
    base_seed: int = 0
    dt: float = 0.01
    t_max: float = 5.0


@dataclass
class RunConfig:
    model: MixtureSpec
    schedule_kind: ScheduleKind
    tau: float
    s0_values: tuple[float, ...]
    switch_fraction: float | None
    dt: float
    solver: str
    sweep: tuple[SweepPoint, ...] | None
    fit: dict
    oracle: OracleParams | None
    output_dir: Path
    memory_cap_bytes: int
    threads: int | None = None
    dump_kernels: bool = False
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def config_hash(self) -> str:
        numeric = {k: v for k, v in self.raw.items() if k not in EXECUTION_KEYS}
        canonical = json.dumps(numeric, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid.for_tau(self.tau, self.dt)

    def schedule(self, tau: float | None = None, s0: float | None = None) -> Schedule:
        tau = self.tau if tau is None else tau
        if self.schedule_kind is ScheduleKind.TWO_STAGE:
            if s0 is None:
                if len(self.s0_values) != 1:
                    raise ConfigError("schedule.s0: several values given; pick one")
                s0 = self.s0_values[0]
            switch = None if self.switch_fraction is None else self.switch_fraction * tau
            return Schedule(self.schedule_kind, tau, s0, switch)
        return Schedule(self.schedule_kind, tau)


def _require(d, key, where):
    if key not in d:
        raise ConfigError(f"{where}{key}: missing")
    return d[key]


def _number(value, where, positive=True):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(f"{where}: must be positive, got {value!r}")
    return float(value)


def parse_config(doc: dict, overrides: dict | None = None) -> RunConfig:
    """Validate a config mapping; ``overrides`` are dotted keys such as ``grid.dt``."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    doc = copy.deepcopy(doc)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        node = doc
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    unknown = set(doc) - KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    try:
        model = MixtureSpec.from_pairs(_require(doc, "model", ""))
    except ConfigError as exc:
        raise ConfigError(f"model: {exc}") from exc

    sched = _require(doc, "schedule", "")
    if not isinstance(sched, dict):
        raise ConfigError("schedule: expected an object")
    try:
        kind = ScheduleKind(_require(sched, "kind", "schedule."))
    except ValueError:
        raise ConfigError(
            f"schedule.kind: expected one of {[k.value for k in ScheduleKind]}, got {sched.get('kind')!r}"
        ) from None
    tau = _number(_require(sched, "tau", "schedule."), "schedule.tau")
    s0_values: tuple[float, ...] = ()
    switch_fraction = None
    if kind is ScheduleKind.TWO_STAGE:
        s0 = _require(sched, "s0", "schedule.")
        s0_list = s0 if isinstance(s0, list) else [s0]
        if not s0_list:
            raise ConfigError("schedule.s0: empty list")
        for v in s0_list:
            v = _number(v, "schedule.s0")
            if not v < 1:
                raise ConfigError(f"schedule.s0: must lie in (0, 1), got {v!r}")
        s0_values = tuple(float(v) for v in s0_list)
        if sched.get("switch_time") is not None:
            switch_fraction = _number(sched["switch_time"], "schedule.switch_time", False) / tau
    elif "s0" in sched:
        raise ConfigError(f"schedule.s0: only valid for two_stage, not {kind.value}")

    grid = _require(doc, "grid", "")
    dt = _number(_require(grid, "dt", "grid."), "grid.dt")
    try:
        TimeGrid.for_tau(tau, dt)
    except ConfigError as exc:
        raise ConfigError(f"schedule.tau/grid.dt: {exc}") from exc

    solver = doc.get("solver", "langevin")
    if solver not in SOLVERS:
        raise ConfigError(f"solver: expected one of {SOLVERS}, got {solver!r}")
    if solver == "keldysh" and kind not in (ScheduleKind.ANNEAL, ScheduleKind.ZERO):
        raise ConfigError(
            f"solver: keldysh needs a schedule with s(0) = 0, but {kind.value} starts at s(0) > 0"
        )

    sweep = None
    if doc.get("sweep") is not None:
        raw_sweep = doc["sweep"]
        if not isinstance(raw_sweep, list):
            raise ConfigError("sweep: expected a list of taus")
        points = []
        for i, entry in enumerate(raw_sweep):
            where = f"sweep[{i}]"
            if isinstance(entry, dict):
                t = _number(_require(entry, "tau", where + "."), where + ".tau")
                d = _number(entry.get("dt", dt), where + ".dt")
            else:
                t, d = _number(entry, where), dt
            try:
                TimeGrid.for_tau(t, d)
            except ConfigError as exc:
                raise ConfigError(f"{where}: {exc}") from exc
            points.append(SweepPoint(t, d))
        taus = [p.tau for p in points]
        if len(set(taus)) != len(taus):
            raise ConfigError("sweep: duplicate tau values")
        sweep = tuple(sorted(points, key=lambda p: p.tau))

    fit = dict(doc.get("fit") or {})
    fit.setdefault("min_points", 4)
    fit.setdefault("tau_min", None)
    fit.setdefault("tau_max", None)
    if int(fit["min_points"]) < 4:
        raise ConfigError("fit.min_points: must be >= 4")

    oracle = None
    if doc.get("oracle") is not None:
        o = dict(doc["oracle"])
        unknown = set(o) - set(OracleParams.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"oracle: unknown keys {sorted(unknown)}")
        oracle = OracleParams(**o)
        if int(oracle.n_samples) < 2:
            raise ConfigError("oracle.n_samples: must be >= 2")
        if int(oracle.n_spins) < 3:
            raise ConfigError("oracle.n_spins: must be >= 3")
        _number(oracle.dt, "oracle.dt")
        _number(oracle.t_max, "oracle.t_max")

    cap = doc.get("memory_cap_bytes", DEFAULT_MEMORY_CAP)
    if isinstance(cap, bool) or not isinstance(cap, int) or cap <= 0:
        raise ConfigError(f"memory_cap_bytes: expected a positive integer, got {cap!r}")
    threads = doc.get("threads")
    if threads is not None and (not isinstance(threads, int) or threads < 1):
        raise ConfigError(f"threads: expected a positive integer, got {threads!r}")

    return RunConfig(
        model=model, schedule_kind=kind, tau=tau, s0_values=s0_values,
        switch_fraction=switch_fraction, dt=dt, solver=solver, sweep=sweep, fit=fit,
        oracle=oracle, output_dir=Path(doc.get("output_dir", "annealdyn_out")),
        memory_cap_bytes=cap, threads=threads, dump_kernels=bool(doc.get("dump_kernels", False)),
        raw=doc,
    )


def load_config(path, overrides: dict | None = None) -> RunConfig:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path}: invalid JSON ({exc})") from None
    return parse_config(doc, overrides)


def required_bytes(points) -> int:
    """Largest single-run grid footprint over the given sweep points."""
    return max(grid_bytes(p.grid.n_steps) for p in points)
