import math

import numpy as np
import pytest

from annealdyn.errors import ConfigError
from annealdyn.schedule import (Schedule, TimeGrid, quantum_coefficients, s_at,
                                sample_quantum, sample_schedule)


def test_examples():
    assert s_at(Schedule.anneal(10), 5) == 0.5
    assert s_at(Schedule.two_stage(10, 0.6), 3) == 0.6
    for t in (0, 2.5, 10):
        assert s_at(Schedule.quench(10), t) == 1.0


def test_two_stage_switch_belongs_to_second_stage():
    sched = Schedule.two_stage(10, 0.6)
    assert s_at(sched, 5.0) == 1.0
    assert s_at(sched, 4.999) == 0.6
    # grid arithmetic that lands a rounding error below tau/2
    assert s_at(sched, 0.1 * 50) == 1.0


def test_quantum_examples():
    assert quantum_coefficients(Schedule.anneal(10), 0) == (0.0, 1.0)
    assert quantum_coefficients(Schedule.anneal(10), 5) == (0.5, 2.0)
    sj, sk = quantum_coefficients(Schedule.anneal(10), 10)
    assert sj == 1.0 and math.isinf(sk)


def test_out_of_range():
    with pytest.raises(ValueError):
        s_at(Schedule.anneal(10), 10.5)
    with pytest.raises(ValueError):
        s_at(Schedule.anneal(10), -0.1)


def test_ramp_symmetry():
    grid = TimeGrid.for_tau(10, 0.1)
    s = sample_schedule(Schedule.anneal(10), grid)
    np.testing.assert_allclose(s + s[::-1], 1.0, rtol=0, atol=1e-15)


def test_sk_is_inverse_mass():
    grid = TimeGrid.for_tau(10, 0.1)
    sj, sk = sample_quantum(Schedule.anneal(10), grid)
    finite = np.isfinite(sk)
    assert not finite[-1] and finite[:-1].all()
    assert np.all(sk[finite] == 1.0 / (1.0 - sj[finite]))


@pytest.mark.parametrize("kind", ["quench", "anneal", "two_stage"])
def test_bounded_and_monotone(kind):
    sched = Schedule.two_stage(20, 0.3) if kind == "two_stage" else Schedule(kind, 20)
    s = sample_schedule(sched, TimeGrid.for_tau(20, 0.05))
    assert np.all((0 <= s) & (s <= 1))
    assert np.all(np.diff(s) >= 0)


def test_grid_validation():
    assert TimeGrid.for_tau(12.5, 0.025).n_steps == 500
    assert TimeGrid.for_tau(200, 0.04).n_steps == 5000
    with pytest.raises(ConfigError):
        TimeGrid.for_tau(12.5, 0.04)
    with pytest.raises(ConfigError):
        TimeGrid.for_tau(10, -0.1)


@pytest.mark.parametrize("args", [("two_stage", 10, None), ("two_stage", 10, 1.0),
                                  ("two_stage", 10, 0.0), ("anneal", 10, 0.5), ("quench", 0, None)])
def test_invalid_schedules(args):
    with pytest.raises(ConfigError):
        Schedule(*args)


def test_with_tau_keeps_switch_fraction():
    sched = Schedule.two_stage(10, 0.5, switch_time=3).with_tau(20)
    assert sched.switch_time == pytest.approx(6)
