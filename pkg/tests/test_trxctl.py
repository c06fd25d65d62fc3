import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fiberid.errors import InvalidTransition
from fiberid.identify import wwi_vs_snr
from fiberid.physics import LinkBudget, SweepConfig
from fiberid.trxctl import (
    Mode,
    Port,
    TrxState,
    enter_identification,
    exit_identification,
    minimum_snr,
    plan_identification,
)

V = 2e8
SWEEP = SweepConfig(25e9, 1e-5, 10)


def check_ports(state):
    if state.mode is Mode.TRANSMISSION:
        assert (state.sw_port1, state.sw_port2) == (Port.CLOSED, Port.OPEN)
        assert state.oi_session is None
    else:
        assert (state.sw_port1, state.sw_port2) == (Port.OPEN, Port.CLOSED)
        assert state.oi_session is not None


def test_enter_flips_ports():
    s = enter_identification(TrxState(), SWEEP)
    assert s.mode is Mode.IDENTIFICATION
    assert (s.sw_port1, s.sw_port2) == (Port.OPEN, Port.CLOSED)
    assert s.oi_session.sweep == SWEEP


def test_double_enter_rejected():
    s = enter_identification(TrxState(), SWEEP)
    with pytest.raises(InvalidTransition):
        enter_identification(s, SWEEP)
    check_ports(s)


def test_round_trip_restores_state():
    start = TrxState()
    back, _ = exit_identification(enter_identification(start, SWEEP))
    assert back == start


def test_exit_without_session():
    with pytest.raises(InvalidTransition):
        exit_identification(TrxState())


@pytest.mark.parametrize("t_sw,n_sw,expected", [(1e-5, 10, 1e-4), (1e-5, 1, 1e-5), (2e-6, 7, 1.4e-5)])
def test_downtime(t_sw, n_sw, expected):
    _, downtime = exit_identification(enter_identification(TrxState(), SweepConfig(10e9, t_sw, n_sw)))
    assert downtime == pytest.approx(expected, rel=1e-12)


def test_inconsistent_state_rejected():
    with pytest.raises(InvalidTransition):
        TrxState(Mode.TRANSMISSION, Port.OPEN, Port.CLOSED)
    with pytest.raises(InvalidTransition):
        TrxState(Mode.IDENTIFICATION, Port.OPEN, Port.CLOSED, None)


@given(st.lists(st.booleans(), max_size=40))
def test_random_sequences_keep_port_invariant(ops):
    state = TrxState()
    for enter in ops:
        try:
            state = enter_identification(state, SWEEP) if enter else exit_identification(state)[0]
        except InvalidTransition:
            pass
        check_ports(state)


class TestPlan:
    link = LinkBudget(power_w=1e-3, distance_m=100.0, group_velocity_m_per_s=V)

    def test_50ghz_target_minus20_needs_at_most_7db(self):
        plan = plan_identification(self.link, SweepConfig(50e9, 1e-5), 0.5, -20.0)
        assert plan.feasible
        assert plan.required_snr_db <= 7.0
        _, achieved = wwi_vs_snr(plan.required_snr_linear, 50e9, 0.5, V)
        assert achieved <= -20.0

    def test_required_snr_is_minimal(self):
        sweep = SweepConfig(25e9, 1e-5)
        snr = minimum_snr(-15.0, sweep, 0.5, V)
        assert wwi_vs_snr(snr, 25e9, 0.5, V)[1] <= -15.0
        assert wwi_vs_snr(snr * 10 ** (-0.01 / 10), 25e9, 0.5, V)[1] > -15.0

    def test_vacuous_target(self):
        plan = plan_identification(self.link, SweepConfig(25e9, 1e-5), 0.5, 0.0)
        assert plan.feasible and plan.n_sw == 1
        assert plan.downtime_s == 1e-5

    def test_more_power_needs_less_time(self):
        sweep = SweepConfig(25e9, 2e-6)
        times = [
            plan_identification(
                LinkBudget(power_w=p, distance_m=100.0, group_velocity_m_per_s=V), sweep, 0.5, -20.0
            ).required_measure_time_s
            for p in (1e-4, 1e-3, 1e-2)
        ]
        assert times[0] > times[1] > times[2]

    def test_measure_time_reaches_target(self):
        sweep = SweepConfig(25e9, 2e-6)
        plan = plan_identification(self.link, sweep, 0.5, -20.0)
        assert plan.feasible and plan.achieved_log10_wwi <= -20.0
        assert plan.downtime_s == pytest.approx(plan.n_sw * 2e-6)

    def test_sweep_too_short_is_infeasible(self):
        far = LinkBudget(power_w=1e-3, distance_m=10e3, group_velocity_m_per_s=V)
        plan = plan_identification(far, SweepConfig(25e9, 1e-4), 0.5, -10.0)
        assert not plan.feasible and "sweep time" in plan.reason

    def test_unreachable_target(self):
        plan = plan_identification(self.link, SweepConfig(10e9, 1e-5), 0.5, -60.0)
        assert not plan.feasible and math.isinf(plan.required_measure_time_s)
