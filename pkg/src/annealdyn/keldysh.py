"""Real-time (Keldysh) dynamics of the quantum-annealed spherical p-spin model.

The quantum problem has coupling ``s_J(t)`` on the landscape and kinetic
prefactor ``1 / (2 s_K(t))``.  For quantum annealing ``s_J = t/tau`` and
``s_K = 1/(1 - t/tau)``; other coefficient pairs can be passed directly to
:class:`KeldyshState`.

The update is the exact discrete scheme obtained from the time-sliced path
integral: a three-point stencil in ``s_K`` for the second time derivative,
a curvature recursion ``A(t)`` for the first off-diagonal of ``C``
(``C(t+dt, t) = 1 - A(t) dt**2``) and ``R(t+dt, t) = dt / s_K(t)``.  All
memory terms use ``Q = C - iR/2`` built on the fly.
"""
from __future__ import annotations

import logging
import math

import numpy as np

from . import _kernels as K
from .errors import ConfigError, NumericalBlowUp
from .fields import (
    DEFAULT_MEMORY_CAP,
    SolverTrace,
    TwoTimeField,
    close_row,
    new_grids,
)
from .model import MixtureSpec
from .schedule import Schedule, TimeGrid, sample_quantum

log = logging.getLogger(__name__)


class KeldyshState:
    """Grids plus ``z``, ``A`` and energy traces; ``k`` is the last complete row."""

    def __init__(self, spec: MixtureSpec, sJ: np.ndarray, sK: np.ndarray, dt: float,
                 memory_cap: int | None = DEFAULT_MEMORY_CAP):
        self.spec = spec
        self.sJ = np.ascontiguousarray(sJ, dtype=float)
        self.sK = np.ascontiguousarray(sK, dtype=float)
        if self.sJ.shape != self.sK.shape or self.sJ.ndim != 1 or len(self.sJ) < 2:
            raise ConfigError("s_J and s_K must be 1-D arrays of equal length >= 2")
        if self.sJ[0] != 0.0:
            raise ConfigError(
                f"quantum dynamics starts in the free ground state and needs s(0) = 0, got {self.sJ[0]!r}"
            )
        if not (math.isfinite(self.sK[0]) and self.sK[0] > 0):
            raise ConfigError(f"s_K(0) must be finite and positive, got {self.sK[0]!r}")
        self.dt = float(dt)
        self.n_steps = len(self.sJ) - 1
        self.C, self.R = new_grids(self.n_steps, memory_cap)
        n1 = self.n_steps + 1
        self.z = np.full(n1, np.nan)
        self.A = np.full(n1, np.nan)
        self.energy = np.full(n1, np.nan)
        self.z_combined = np.full(n1, np.nan)
        self.residual = np.full(n1, np.nan)
        self._d0 = spec.dense_coefficients(0)
        self._d1 = spec.dense_coefficients(1)
        self._u = np.zeros(n1)
        self._v = np.zeros(n1)
        self._c_new = np.zeros(n1)
        self._r_new = np.zeros(n1)
        self.k = 0
        keldysh_init(self)

    @classmethod
    def from_schedule(cls, spec, sched: Schedule, grid: TimeGrid, memory_cap=DEFAULT_MEMORY_CAP):
        sJ, sK = sample_quantum(sched, grid)
        return cls(spec, sJ, sK, grid.dt, memory_cap)

    def _sK(self, k):
        val = self.sK[k]
        if not (math.isfinite(val) and val > 0):
            raise RuntimeError(f"update would consume divergent s_K at grid index {k}")
        return val

    def _scalars(self, k):
        if not 1 <= k <= self.k:
            raise ValueError(f"row {k} not available (last complete row {self.k})")
        self._sK(k)
        self._sK(k - 1)
        return K.keldysh_scalars(self.C, self.R, k, self.sJ, self.sK, self.dt,
                                 self.A[k - 1], self._d0, self._d1, self._u, self._v)


def keldysh_init(state: KeldyshState) -> None:
    """Row 0, row 1 and ``z(0), A(0)`` from the Gaussian initial state."""
    dt = state.dt
    sk0 = state.sK[0]
    state.z[0] = 1.0 / (8.0 * sk0)
    state.A[0] = 1.0 / (8.0 * sk0 * sk0)
    state.energy[0] = 0.0
    state.C[1, 0] = 1.0 - state.A[0] * dt * dt
    state.R[1, 0] = dt / sk0
    close_row(state.C, state.R, 1)
    state.k = 1


def keldysh_z(state: KeldyshState, k: int) -> float:
    return state._scalars(k)[0]


def keldysh_curvature(state: KeldyshState, k: int) -> float:
    return state._scalars(k)[1]


def keldysh_energy(state: KeldyshState, k: int) -> float:
    """Potential energy density at ``t_k``; needs only row ``k`` and ``s_J``."""
    if k == 0:
        return 0.0
    if k > state.k:
        raise ValueError(f"row {k} not computed yet")
    return K.keldysh_energy_row(state.C, state.R, k, state.sJ, state.dt, state._d0)


def keldysh_step(state: KeldyshState) -> None:
    """Advance from the last complete row ``k`` (``k >= 1``) to row ``k + 1``."""
    k = state.k
    if k >= state.n_steps:
        raise ValueError("grid already complete")
    z, A, eps = state._scalars(k)
    state.z[k] = z
    state.A[k] = A
    state.energy[k] = eps
    sk = state.sK[k]
    K.keldysh_row(state.C, state.R, k, state.sJ, state.sK, state.dt, z,
                  state._u, state._v, state._c_new, state._r_new)
    c_row = state._c_new[:k]
    r_row = state._r_new[:k]
    c_sub = 1.0 - A * state.dt * state.dt
    r_sub = state.dt / sk
    if not (np.all(np.isfinite(c_row)) and np.all(np.isfinite(r_row))
            and math.isfinite(c_sub) and math.isfinite(z)):
        raise NumericalBlowUp((k + 1) * state.dt, state.dt, "keldysh")
    state.C[k + 1, :k] = c_row
    state.R[k + 1, :k] = r_row
    state.C[k + 1, k] = c_sub
    state.R[k + 1, k] = r_sub
    close_row(state.C, state.R, k + 1)
    state.k = k + 1
    state.z_combined[k] = K.keldysh_z_combined(state.C, state.R, k, state.sJ, state.sK,
                                               state.dt, state._d1)
    state.residual[k] = abs(state.z_combined[k] - z)


def keldysh_solve(spec: MixtureSpec, sched: Schedule, grid: TimeGrid,
                  memory_cap: int | None = DEFAULT_MEMORY_CAP):
    """Integrate the whole grid; returns ``(C, R, trace)`` with ``trace.A`` filled.

    ``z`` and ``A`` at the final time are not computed (``nan``): for the
    anneal they would need the divergent ``s_K(tau)`` and nothing downstream
    uses them.
    """
    if sched.s_at(0.0) != 0.0:
        raise ConfigError(f"keldysh solver needs a schedule with s(0) = 0, got {sched.kind.value}")
    state = KeldyshState.from_schedule(spec, sched, grid, memory_cap)
    return run_keldysh(state)


def run_keldysh(state: KeldyshState):
    n = state.n_steps
    log.debug("keldysh: %d steps, dt=%g", n, state.dt)
    while state.k < n:
        keldysh_step(state)
    state.energy[n] = keldysh_energy(state, n)
    times = np.arange(n + 1) * state.dt
    trace = SolverTrace(times, state.sJ.copy(), state.z.copy(), state.energy.copy(),
                        state.residual.copy(), A=state.A.copy(),
                        extra={"z_combined": state.z_combined.copy(), "sK": state.sK.copy()})
    return TwoTimeField(state.C, "correlation"), TwoTimeField(state.R, "response"), trace
