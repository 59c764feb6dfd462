"""Annealing protocols ``s(t)`` on ``[0, tau]`` and the uniform time grid.

``s`` interpolates between pure fluctuations (``s = 0``) and the bare
landscape (``s = 1``).  Three protocols are supported: a naive quench
(``s = 1``), a two-stage quench (``s0`` then ``1``) and a linear anneal
(``s = t / tau``).  For the quantum dynamics the same ``s`` is mapped onto
the coupling ``s_J = s`` and the inverse mass ``s_K = 1 / (1 - s)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError

GRID_TOL = 1e-9


class ScheduleKind(str, Enum):
    QUENCH = "quench"
    TWO_STAGE = "two_stage"
    ANNEAL = "anneal"
    # s == 0 throughout; the free-noise / free-oscillator reference runs
    ZERO = "zero"


@dataclass(frozen=True)
class Schedule:
    kind: ScheduleKind
    tau: float
    s0: float | None = None
    switch_time: float | None = None

    def __post_init__(self):
        kind = ScheduleKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ConfigError(f"schedule.tau must be positive, got {self.tau!r}")
        if kind is ScheduleKind.TWO_STAGE:
            if self.s0 is None or not (0.0 < self.s0 < 1.0):
                raise ConfigError(f"two_stage schedule needs 0 < s0 < 1, got {self.s0!r}")
            if self.switch_time is None:
                object.__setattr__(self, "switch_time", 0.5 * self.tau)
            elif not (0.0 <= self.switch_time <= self.tau):
                raise ConfigError("schedule.switch_time must lie in [0, tau]")
        elif self.s0 is not None or self.switch_time is not None:
            raise ConfigError(f"s0/switch_time only apply to two_stage, not {kind.value}")

    @classmethod
    def quench(cls, tau):
        return cls(ScheduleKind.QUENCH, tau)

    @classmethod
    def two_stage(cls, tau, s0, switch_time=None):
        return cls(ScheduleKind.TWO_STAGE, tau, s0, switch_time)

    @classmethod
    def anneal(cls, tau):
        return cls(ScheduleKind.ANNEAL, tau)

    @classmethod
    def zero(cls, tau):
        return cls(ScheduleKind.ZERO, tau)

    def s_at(self, t: float) -> float:
        return s_at(self, t)

    def quantum_coefficients(self, t: float) -> tuple[float, float]:
        return quantum_coefficients(self, t)

    def with_tau(self, tau: float) -> "Schedule":
        switch = None
        if self.kind is ScheduleKind.TWO_STAGE:
            # keep the switch at the same fraction of the runtime
            switch = self.switch_time * tau / self.tau
        return Schedule(self.kind, tau, self.s0, switch)


def s_at(sched: Schedule, t: float) -> float:
    """Protocol value ``s(t)``; the two-stage switch time itself maps to 1."""
    if not (-GRID_TOL * sched.tau <= t <= sched.tau * (1 + GRID_TOL)):
        raise ValueError(f"t={t!r} outside [0, {sched.tau}]")
    kind = sched.kind
    if kind is ScheduleKind.QUENCH:
        return 1.0
    if kind is ScheduleKind.ZERO:
        return 0.0
    if kind is ScheduleKind.TWO_STAGE:
        # grid points within rounding of the switch belong to the second stage
        return sched.s0 if t < sched.switch_time - GRID_TOL * sched.tau else 1.0
    return min(max(t / sched.tau, 0.0), 1.0)


def quantum_coefficients(sched: Schedule, t: float) -> tuple[float, float]:
    """``(s_J, s_K) = (s, 1/(1-s))``; ``s_K`` is ``inf`` where ``s == 1``.

    The infinite stiffness is a sentinel the Keldysh stepper refuses to consume.
    """
    s = s_at(sched, t)
    if s >= 1.0:
        return s, math.inf
    return s, 1.0 / (1.0 - s)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_k = k * dt``, ``k = 0..n_steps``."""

    dt: float
    n_steps: int

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"grid.dt must be positive, got {self.dt!r}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ConfigError(f"grid needs at least one step, got {self.n_steps!r}")
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @classmethod
    def for_tau(cls, tau: float, dt: float) -> "TimeGrid":
        if not (dt > 0 and tau > 0):
            raise ConfigError(f"tau and dt must be positive (tau={tau!r}, dt={dt!r})")
        ratio = tau / dt
        n = round(ratio)
        if n < 1 or abs(ratio - n) > GRID_TOL * max(1.0, ratio):
            raise ConfigError(f"tau={tau!r} is not an integer multiple of dt={dt!r}")
        return cls(dt, n)

    @property
    def tau(self) -> float:
        return self.n_steps * self.dt

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt


def sample_schedule(sched: Schedule, grid: TimeGrid) -> np.ndarray:
    """``s(t_k)`` on every grid point."""
    return np.array([s_at(sched, t) for t in grid.times])


def sample_quantum(sched: Schedule, grid: TimeGrid) -> tuple[np.ndarray, np.ndarray]:
    """``s_J(t_k)`` and ``s_K(t_k)`` on every grid point (``inf`` where divergent)."""
    pairs = [quantum_coefficients(sched, t) for t in grid.times]
    return np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs])
