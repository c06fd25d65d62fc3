"""Mode logic of the dual-mode coherent transceiver.

In transmission mode switch port 1 is closed and port 2 open, so the
unmodulated LO reaches the coherent receiver. Identification mode flips both
ports: the swept light after the modulator becomes the LO, and data traffic
is suspended for the length of the OFDR session.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import ConstraintError, InvalidTransition
from .identify import decision_for_snr
from .physics import (
    LinkBudget,
    SweepConfig,
    check_sweep_time,
    effective_measure_time,
    linear_to_db,
    rbp_bandwidth,
    signature_length,
    snr_estimate,
)


class Mode(enum.Enum):
    TRANSMISSION = "transmission"
    IDENTIFICATION = "identification"


class Port(enum.Enum):
    OPEN = "open"
    CLOSED = "closed"


_PORTS = {
    Mode.TRANSMISSION: (Port.CLOSED, Port.OPEN),
    Mode.IDENTIFICATION: (Port.OPEN, Port.CLOSED),
}


@dataclass(frozen=True)
class OiSession:
    sweep: SweepConfig
    started_at: float


@dataclass(frozen=True)
class TrxState:
    mode: Mode = Mode.TRANSMISSION
    sw_port1: Port = Port.CLOSED
    sw_port2: Port = Port.OPEN
    oi_session: OiSession | None = None

    def __post_init__(self):
        if (self.sw_port1, self.sw_port2) != _PORTS[self.mode]:
            raise InvalidTransition(
                f"ports ({self.sw_port1.value}, {self.sw_port2.value}) inconsistent "
                f"with {self.mode.value} mode"
            )
        if (self.oi_session is not None) != (self.mode is Mode.IDENTIFICATION):
            raise InvalidTransition("an OI session exists exactly in identification mode")


def enter_identification(state: TrxState, sweep: SweepConfig, started_at: float = 0.0) -> TrxState:
    if state.mode is not Mode.TRANSMISSION:
        raise InvalidTransition("already in identification mode")
    port1, port2 = _PORTS[Mode.IDENTIFICATION]
    return TrxState(Mode.IDENTIFICATION, port1, port2, OiSession(sweep, started_at))


def exit_identification(state: TrxState) -> tuple[TrxState, float]:
    """Return to transmission; the downtime is the session's total sweep time."""
    if state.mode is not Mode.IDENTIFICATION:
        raise InvalidTransition("not in identification mode")
    downtime = effective_measure_time(state.oi_session.sweep)
    return TrxState(), downtime


@dataclass(frozen=True)
class IdentificationPlan:
    feasible: bool
    required_snr_linear: float
    required_measure_time_s: float
    n_sw: int
    downtime_s: float
    achieved_log10_wwi: float
    reason: str = ""

    @property
    def required_snr_db(self) -> float:
        return linear_to_db(self.required_snr_linear)


def _log10_wwi_at(snr_db: float, sweep, length_m, v, r) -> float:
    model = decision_for_snr(10.0 ** (snr_db / 10.0), sweep.delta_f, length_m, v, r)
    return model.log10_wwi


def minimum_snr(
    target_log10_wwi: float,
    sweep: SweepConfig,
    length_m: float,
    v: float,
    r: float = 0.5,
    snr_db_range: tuple[float, float] = (-30.0, 80.0),
    tol_db: float = 1e-4,
) -> float | None:
    """Smallest in-band SNR (linear) reaching the target, or None if out of reach.

    Integer thresholds make WWI(SNR) a slightly ragged staircase, so the
    bisection result is the lowest SNR found on a sub-mdB grid, not an
    analytical root.
    """
    lo, hi = snr_db_range
    if target_log10_wwi >= math.log10(0.5):
        return 0.0
    if _log10_wwi_at(hi, sweep, length_m, v, r) > target_log10_wwi:
        return None
    if _log10_wwi_at(lo, sweep, length_m, v, r) <= target_log10_wwi:
        return 10.0 ** (lo / 10.0)
    while hi - lo > tol_db:
        mid = 0.5 * (lo + hi)
        if _log10_wwi_at(mid, sweep, length_m, v, r) <= target_log10_wwi:
            hi = mid
        else:
            lo = mid
    return 10.0 ** (hi / 10.0)


def plan_identification(
    link: LinkBudget,
    sweep: SweepConfig,
    length_m: float,
    target_log10_wwi: float,
    r: float = 0.5,
) -> IdentificationPlan:
    """Minimum SNR and measure time to reach ``target_log10_wwi``.

    The SNR grows linearly with the total measure time n_sw T_sw, so the
    required time follows from inverting the link budget at the single-sweep
    bandwidth.  Infeasibility is reported in the result, never raised.
    """
    v = link.group_velocity_m_per_s
    try:
        check_sweep_time(sweep, link.distance_m, length_m, v)
        n_bits = signature_length(sweep.delta_f, length_m, v)
    except (ConstraintError, ValueError) as exc:
        return IdentificationPlan(False, math.nan, math.nan, 0, math.nan, math.nan, str(exc))

    snr_req = minimum_snr(target_log10_wwi, sweep, length_m, v, r)
    if snr_req is None:
        return IdentificationPlan(
            False, math.inf, math.inf, 0, math.inf, math.nan,
            f"target 1e{target_log10_wwi:g} is out of reach with N = {n_bits} bits",
        )
    snr_one_sweep = snr_estimate(link, rbp_bandwidth(sweep.gamma, length_m, v))
    time_req = sweep.t_sw * snr_req / snr_one_sweep
    n_sw = max(1, math.ceil(time_req / sweep.t_sw * (1 - 1e-12)))
    achieved = _log10_wwi_at(linear_to_db(n_sw * snr_one_sweep), sweep, length_m, v, r)
    return IdentificationPlan(
        feasible=True,
        required_snr_linear=snr_req,
        required_measure_time_s=time_req,
        n_sw=n_sw,
        downtime_s=n_sw * sweep.t_sw,
        achieved_log10_wwi=achieved,
    )
