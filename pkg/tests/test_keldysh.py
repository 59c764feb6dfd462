import numpy as np
import pytest

from annealdyn.errors import ConfigError, MemoryCapError
from annealdyn.keldysh import (KeldyshState, keldysh_curvature, keldysh_energy, keldysh_solve,
                               keldysh_step, keldysh_z, run_keldysh)
from annealdyn.model import MixtureSpec
from annealdyn.schedule import Schedule, TimeGrid, sample_quantum


def reference_keldysh(spec, sJ, sK, dt):
    """Direct transcription of the discrete scheme with full complex matrices."""
    n = len(sJ) - 1
    C = np.eye(n + 1)
    R = np.zeros((n + 1, n + 1))
    z = np.full(n + 1, np.nan)
    A = np.full(n + 1, np.nan)
    eps = np.zeros(n + 1)
    z[0], A[0] = 1 / (8 * sK[0]), 1 / (8 * sK[0] ** 2)
    C[1, 0] = C[0, 1] = 1 - A[0] * dt**2
    R[1, 0] = dt / sK[0]
    Q = lambda a, b: C[a, b] - 0.5j * R[a, b]  # noqa: E731
    for k in range(1, n + 1):
        eps[k] = sum(dt * sJ[j] * spec.f(Q(k, j)).imag for j in range(k))
        if k == n:
            break
        z[k] = 2 * sK[k] * A[k - 1] - sJ[k] * sum(
            dt * sJ[j] * (spec.f(Q(k, j), 1) * Q(k, j)).imag for j in range(k))
        A[k] = (sK[k - 1] / sK[k]) ** 2 * A[k - 1] - sJ[k] * dt / sK[k] * sum(
            sJ[j] * (spec.f(Q(k, j)).imag - spec.f(Q(k - 1, j)).imag) for j in range(k))
        for tp in range(k):
            ic = sum(dt * sJ[j] * (spec.f(Q(k, j), 1) * Q(tp, j)).imag for j in range(k))
            ir = sum(dt * sJ[j] * spec.f(Q(k, j), 1).imag * R[j, tp] for j in range(tp, k))
            stencil_c = (sK[k] + sK[k - 1]) * C[k, tp] - sK[k - 1] * C[k - 1, tp]
            stencil_r = (sK[k] + sK[k - 1]) * R[k, tp] - sK[k - 1] * R[k - 1, tp]
            C[k + 1, tp] = (stencil_c - dt**2 * (z[k] * C[k, tp] + sJ[k] * ic)) / sK[k]
            R[k + 1, tp] = (stencil_r - dt**2 * (z[k] * R[k, tp] + sJ[k] * ir)) / sK[k]
            C[tp, k + 1] = C[k + 1, tp]
        C[k + 1, k] = C[k, k + 1] = 1 - A[k] * dt**2
        R[k + 1, k] = dt / sK[k]
    return C, R, z, A, eps


def free_state(n, dt, sk=None):
    sK = np.ones(n + 1) if sk is None else sk
    return KeldyshState(MixtureSpec.pure(3), np.zeros(n + 1), sK, dt)


def test_init_values():
    state = free_state(10, 0.04)
    assert state.z[0] == 0.125 and state.A[0] == 0.125
    assert state.R[1, 0] == 0.04
    assert state.C[1, 0] == pytest.approx(0.9998, abs=1e-15)
    assert state.C[0, 0] == 1.0 and state.R[0, 0] == 0.0


@pytest.mark.parametrize("spec_pairs", [[[3, 1.0]], [[3, 1.0], [14, 1.0]]])
def test_matches_reference(spec_pairs):
    spec = MixtureSpec.from_pairs(spec_pairs)
    sched, grid = Schedule.anneal(2.0), TimeGrid.for_tau(2.0, 0.05)
    sJ, sK = sample_quantum(sched, grid)
    C, R, tr = keldysh_solve(spec, sched, grid)
    Cr, Rr, zr, Ar, er = reference_keldysh(spec, sJ, sK, 0.05)
    np.testing.assert_allclose(C.lower(), Cr, rtol=0, atol=1e-12)
    np.testing.assert_allclose(R.lower(), Rr, rtol=0, atol=1e-12)
    np.testing.assert_allclose(tr.z, zr, rtol=0, atol=1e-12)
    np.testing.assert_allclose(tr.A, Ar, rtol=0, atol=1e-12)
    np.testing.assert_allclose(tr.energy, er, rtol=0, atol=1e-12)
    assert np.isnan(tr.z[-1]) and np.isnan(tr.A[-1])


def test_first_anneal_step_by_hand(p3):
    # at t = dt: z = 2 sK(dt) A(0) - sJ(dt) dt sJ(0) (...) = 2 sK(dt) A(0) since sJ(0) = 0
    sched, grid = Schedule.anneal(1.0), TimeGrid.for_tau(1.0, 0.1)
    state = KeldyshState.from_schedule(p3, sched, grid)
    sk1 = 1 / (1 - 0.1)
    assert keldysh_z(state, 1) == pytest.approx(2 * sk1 * 0.125, rel=1e-15)
    assert keldysh_curvature(state, 1) == pytest.approx((1 / sk1) ** 2 * 0.125, rel=1e-15)
    keldysh_step(state)
    c_next = ((sk1 + 1) * (1 - 0.125 * 0.01) - 1 * 1.0 - 0.01 * keldysh_z(state, 1) * (1 - 0.00125)) / sk1
    assert state.C[2, 0] == pytest.approx(c_next, abs=1e-14)
    assert state.R[2, 1] == pytest.approx(0.1 / sk1, abs=1e-15)


def test_free_field_time_translation_invariance():
    state = free_state(500, 0.01)
    C, R, tr = run_keldysh(state)
    full = C.lower()
    assert np.max(np.abs(np.diag(full) - 1)) == 0.0
    worst = 0.0
    for lag in range(1, full.shape[0]):
        band = np.diag(full, -lag)
        worst = max(worst, np.max(np.abs(band - band[0])))
    assert worst <= 1e-6
    assert np.all(tr.energy == 0.0)


def test_free_field_curvature_constant():
    state = free_state(50, 0.02)
    _, _, tr = run_keldysh(state)
    assert np.all(tr.A[:-1] == 0.125)
    # the prescribed z(0) is only reported; every update after it sees 2 s_K A = 1/4
    assert tr.z[0] == 0.125
    np.testing.assert_array_equal(tr.z[1:-1], 0.25)


def test_curvature_telescopes_without_coupling():
    n, dt = 200, 0.01
    sK = 1 / (1 - np.linspace(0, 0.9, n + 1))
    state = free_state(n, dt, sK)
    _, _, tr = run_keldysh(state)
    expected = 0.125 * sK[0] ** 2 / sK[:-1] ** 2
    np.testing.assert_allclose(tr.A[:-1], expected, rtol=1e-12)
    np.testing.assert_allclose(tr.z[1:-1], 2 * sK[1:-1] * tr.A[:-2], rtol=1e-12)
    assert np.all(tr.energy == 0.0)


def test_diagonal_pinning_and_causality_taint(mixed):
    sched, grid = Schedule.anneal(2.0), TimeGrid.for_tau(2.0, 0.04)
    clean = KeldyshState.from_schedule(mixed, sched, grid)
    dirty = KeldyshState.from_schedule(mixed, sched, grid)
    for _ in range(20):
        keldysh_step(clean)
        keldysh_step(dirty)
    k = dirty.k
    for X in (dirty.C, dirty.R):
        X[k + 1:, :] = np.nan
        X[:, k + 1:] = np.nan
    keldysh_step(clean)
    keldysh_step(dirty)
    np.testing.assert_array_equal(dirty.C[k + 1, :k + 2], clean.C[k + 1, :k + 2])
    np.testing.assert_array_equal(dirty.R[k + 1, :k + 2], clean.R[k + 1, :k + 2])
    assert dirty.C[k + 1, k + 1] == 1.0 and dirty.R[k + 1, k + 1] == 0.0
    assert keldysh_energy(dirty, k + 1) == keldysh_energy(clean, k + 1)


@pytest.mark.parametrize("dt", [0.04, 0.02])
def test_constraint_residual(p3, dt):
    _, _, tr = keldysh_solve(p3, Schedule.anneal(25.0), TimeGrid.for_tau(25.0, dt))
    z = tr.z[1:-1]
    resid = np.abs(tr.extra["z_combined"][1:-1] - z)
    assert np.all(resid <= 5 * dt * (1 + np.abs(z)))


def test_dt_halving_ratio(p3):
    e = [keldysh_solve(p3, Schedule.anneal(25.0), TimeGrid.for_tau(25.0, dt))[2].energy_final
         for dt in (0.04, 0.02, 0.01)]
    ratio = (e[0] - e[1]) / (e[1] - e[2])
    assert 1.5 <= ratio <= 3.0


def test_divergent_stiffness_never_consumed(p3):
    sched, grid = Schedule.anneal(1.0), TimeGrid.for_tau(1.0, 0.1)
    C, R, tr = keldysh_solve(p3, sched, grid)
    assert np.all(np.isfinite(C.lower())) and np.all(np.isfinite(R.lower()))
    assert np.isfinite(tr.energy_final)
    state = KeldyshState.from_schedule(p3, sched, grid)
    while state.k < grid.n_steps:
        keldysh_step(state)
    with pytest.raises(RuntimeError):
        keldysh_z(state, grid.n_steps)


@pytest.mark.parametrize("sched", [Schedule.quench(5.0), Schedule.two_stage(5.0, 0.5)])
def test_requires_zero_initial_coupling(p3, sched):
    with pytest.raises(ConfigError):
        keldysh_solve(p3, sched, TimeGrid.for_tau(5.0, 0.1))


def test_memory_cap(p3):
    with pytest.raises(MemoryCapError):
        keldysh_solve(p3, Schedule.anneal(5.0), TimeGrid.for_tau(5.0, 0.01), memory_cap=1 << 16)
