"""Mean-field Langevin (simulated annealing) dynamics on the two-time grid.

Integrates the closed equations for the correlation ``C(t, t')``, response
``R(t, t')``, Lagrange multiplier ``z(t)`` and energy density of the
spherical mixed p-spin model in the thermodynamic limit.  Time derivatives
are forward differences and memory integrals are left-endpoint sums, so
row ``t + dt`` depends only on rows ``<= t``.
"""
from __future__ import annotations

import logging

import numpy as np

from . import _kernels as K
from .errors import NumericalBlowUp
from .fields import (
    DEFAULT_MEMORY_CAP,
    SolverTrace,
    TwoTimeField,
    cauchy_schwarz_excess,
    close_row,
    new_grids,
)
from .model import MixtureSpec
from .schedule import Schedule, TimeGrid, sample_schedule

log = logging.getLogger(__name__)


class LangevinState:
    """Solver state: grids, schedule samples and the index of the last complete row."""

    def __init__(self, spec: MixtureSpec, s: np.ndarray, dt: float,
                 memory_cap: int | None = DEFAULT_MEMORY_CAP):
        self.spec = spec
        self.s = np.ascontiguousarray(s, dtype=float)
        self.dt = float(dt)
        self.n_steps = len(self.s) - 1
        self.C, self.R = new_grids(self.n_steps, memory_cap)
        self.k = 0
        self.z = np.full(self.n_steps + 1, np.nan)
        self.energy = np.full(self.n_steps + 1, np.nan)
        self.residual = np.zeros(self.n_steps + 1)
        self.energy[0] = 0.0
        self._d1 = spec.dense_coefficients(1)
        self._d2 = spec.dense_coefficients(2)
        self._a = np.zeros(self.n_steps + 1)
        self._b = np.zeros(self.n_steps + 1)
        self._c_new = np.zeros(self.n_steps + 1)
        self._r_new = np.zeros(self.n_steps + 1)

    @classmethod
    def from_schedule(cls, spec, sched: Schedule, grid: TimeGrid, memory_cap=DEFAULT_MEMORY_CAP):
        return cls(spec, sample_schedule(sched, grid), grid.dt, memory_cap)

    def _scalars(self, k):
        if k > self.k:
            raise ValueError(f"row {k} not computed yet (last complete row {self.k})")
        return K.langevin_scalars(self.C, self.R, k, self.s, self.dt,
                                  self._d1, self._d2, self._a, self._b)


def langevin_z(state: LangevinState, k: int) -> float:
    """Lagrange multiplier at ``t_k`` from rows ``<= k``."""
    return state._scalars(k)[0]


def langevin_energy(state: LangevinState, k: int) -> float:
    """Energy density at ``t_k`` (left-endpoint sum over ``t'' < t_k``)."""
    return state._scalars(k)[1]


def langevin_step(state: LangevinState) -> None:
    """Advance from the last complete row ``k`` to row ``k + 1``."""
    k = state.k
    if k >= state.n_steps:
        raise ValueError("grid already complete")
    z, eps = state._scalars(k)
    state.z[k] = z
    state.energy[k] = eps
    K.langevin_row(state.C, state.R, k, state.s, state.dt, z,
                   state._a, state._b, state._c_new, state._r_new)
    c_row = state._c_new[: k + 1]
    r_row = state._r_new[: k + 1]
    if not (np.all(np.isfinite(c_row)) and np.all(np.isfinite(r_row))):
        raise NumericalBlowUp((k + 1) * state.dt, state.dt, "langevin")
    state.C[k + 1, : k + 1] = c_row
    state.R[k + 1, : k + 1] = r_row
    state.R[k + 1, k] = 1.0  # unit kick one step after the perturbation
    close_row(state.C, state.R, k + 1)
    state.k = k + 1
    state.residual[k + 1] = cauchy_schwarz_excess(state.C, k + 1)


def langevin_solve(spec: MixtureSpec, sched: Schedule, grid: TimeGrid,
                   memory_cap: int | None = DEFAULT_MEMORY_CAP):
    """Integrate the whole grid; returns ``(C, R, trace)``."""
    state = LangevinState.from_schedule(spec, sched, grid, memory_cap)
    return run_langevin(state, grid)


def run_langevin(state: LangevinState, grid: TimeGrid | None = None):
    n = state.n_steps
    log.debug("langevin: %d steps, dt=%g", n, state.dt)
    while state.k < n:
        langevin_step(state)
    z, eps = state._scalars(n)
    state.z[n] = z
    state.energy[n] = eps
    times = np.arange(n + 1) * state.dt
    trace = SolverTrace(times, state.s.copy(), state.z.copy(), state.energy.copy(),
                        state.residual.copy())
    return TwoTimeField(state.C, "correlation"), TwoTimeField(state.R, "response"), trace
