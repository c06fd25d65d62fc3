"""Fiber PUF model, dechirped beat-signal synthesis and the receiver SNR budget.

A pigtail of length L is modelled as a set of discrete Rayleigh scatterers.
Interrogating it with a linear sweep of rate gamma produces, after mixing
with the local oscillator, one beat tone per scatterer at
``gamma * 2 * (d + p) / v``.  Waveforms are synthesized at unit mean power;
absolute detectability enters only through the SNR budget used when noise
is injected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConstraintError, ParameterError, ShapeMismatchError, TooFewBitsError

SPEED_OF_LIGHT = 299_792_458.0
ELECTRON_CHARGE = 1.602176634e-19
GROUP_INDEX = 1.468
DEFAULT_GROUP_VELOCITY = SPEED_OF_LIGHT / GROUP_INDEX

MIN_SIGNATURE_BITS = 8


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0:
        return -math.inf
    return 10.0 * math.log10(x)


def dbm_to_watt(p_dbm: float) -> float:
    return 1e-3 * db_to_linear(p_dbm)


def _positive(value: float, name: str) -> None:
    if not (math.isfinite(value) and value > 0):
        raise ParameterError(f"{name} must be positive and finite, got {value!r}")


def _non_negative(value: float, name: str) -> None:
    if not (math.isfinite(value) and value >= 0):
        raise ParameterError(f"{name} must be non-negative and finite, got {value!r}")


@dataclass(frozen=True)
class SweepConfig:
    """Linear frequency sweep: span ``delta_f`` covered in ``t_sw``, repeated ``n_sw`` times."""

    delta_f: float
    t_sw: float
    n_sw: int = 1

    def __post_init__(self):
        _positive(self.delta_f, "delta_f")
        _positive(self.t_sw, "t_sw")
        if int(self.n_sw) != self.n_sw or self.n_sw < 1:
            raise ParameterError(f"n_sw must be a positive integer, got {self.n_sw!r}")

    @property
    def gamma(self) -> float:
        """Sweep rate in Hz/s."""
        return self.delta_f / self.t_sw


@dataclass(frozen=True)
class LinkBudget:
    """Parameters of the receiver SNR budget.

    Detector and fiber defaults are the ones used for the reference
    scenario: NEP = 1 pW/sqrt(Hz), R = 1 A/W, 0.2 dB/km, R_RB = 8e-7.
    """

    power_w: float
    distance_m: float
    alpha_db_per_m: float = 0.2e-3
    responsivity_a_per_w: float = 1.0
    nep_w_per_sqrt_hz: float = 1e-12
    r_rb: float = 8e-7
    electron_charge_c: float = ELECTRON_CHARGE
    group_velocity_m_per_s: float = DEFAULT_GROUP_VELOCITY

    def __post_init__(self):
        _positive(self.power_w, "power_w")
        _non_negative(self.distance_m, "distance_m")
        _non_negative(self.alpha_db_per_m, "alpha_db_per_m")
        _positive(self.responsivity_a_per_w, "responsivity_a_per_w")
        _non_negative(self.nep_w_per_sqrt_hz, "nep_w_per_sqrt_hz")
        _positive(self.electron_charge_c, "electron_charge_c")
        _positive(self.group_velocity_m_per_s, "group_velocity_m_per_s")
        if not 0 < self.r_rb < 1:
            raise ParameterError(f"r_rb must lie in (0, 1), got {self.r_rb!r}")

    @property
    def alpha_neper_per_m(self) -> float:
        # power attenuation coefficient for exp(-alpha * z)
        return self.alpha_db_per_m * math.log(10.0) / 10.0


@dataclass(frozen=True, eq=False)
class FiberPigtail:
    length_m: float
    positions_m: np.ndarray
    reflectivities: np.ndarray
    seed: int
    r_rb: float

    def __post_init__(self):
        if self.positions_m.shape != self.reflectivities.shape:
            raise ShapeMismatchError("positions and reflectivities differ in length")
        if np.any(self.positions_m < 0) or np.any(self.positions_m > self.length_m):
            raise ParameterError("scatterer positions must lie in [0, L]")

    @property
    def n_scatterers(self) -> int:
        return int(self.positions_m.size)

    @property
    def scatterers(self) -> list[tuple[float, complex]]:
        return [(float(p), complex(r)) for p, r in zip(self.positions_m, self.reflectivities)]

    @property
    def total_reflectivity(self) -> float:
        return float(np.sum(np.abs(self.reflectivities) ** 2))


@dataclass(frozen=True, eq=False)
class Trace:
    """Sampled photocurrent over one sweep. ``snr_linear`` is ``inf`` when noiseless."""

    samples: np.ndarray
    sample_rate_hz: float
    t_sw: float
    snr_linear: float = math.inf

    def __post_init__(self):
        expected = round(self.sample_rate_hz * self.t_sw)
        if self.samples.ndim != 1 or self.samples.size != expected:
            raise ShapeMismatchError(
                f"trace has {self.samples.size} samples, expected {expected}"
            )

    @property
    def n_samples(self) -> int:
        return int(self.samples.size)

    @property
    def mean_power(self) -> float:
        return float(np.mean(self.samples**2)) if self.samples.size else 0.0


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def generate_pigtail(
    seed: int, length_m: float, n_scatterers: int = 1000, r_rb: float = 8e-7
) -> FiberPigtail:
    """Draw a pigtail: uniform positions on [0, L], circular Gaussian reflectivities
    rescaled so that the total power reflectivity equals ``r_rb``."""
    _positive(length_m, "length_m")
    if int(n_scatterers) != n_scatterers or n_scatterers < 1:
        raise ParameterError(f"n_scatterers must be a positive integer, got {n_scatterers!r}")
    if not 0 < r_rb < 1:
        raise ParameterError(f"r_rb must lie in (0, 1), got {r_rb!r}")
    rng = np.random.default_rng(seed)
    positions = rng.uniform(0.0, length_m, size=n_scatterers)
    refl = rng.standard_normal(n_scatterers) + 1j * rng.standard_normal(n_scatterers)
    refl *= math.sqrt(r_rb / float(np.sum(np.abs(refl) ** 2)))
    return FiberPigtail(length_m, _frozen(positions), _frozen(refl), seed, r_rb)


def beat_frequency(gamma: float, distance_m: float, position_m: float, v: float):
    return gamma * 2.0 * (distance_m + position_m) / v


def rbp_bandwidth(gamma: float, length_m: float, v: float) -> float:
    return 2.0 * length_m * gamma / v


def signature_length(delta_f: float, length_m: float, v: float) -> int:
    """Number of signature bits, N = 4 * delta_f * L / v rounded to nearest."""
    _positive(delta_f, "delta_f")
    _positive(length_m, "length_m")
    _positive(v, "v")
    n = round(4.0 * delta_f * length_m / v)
    if n < MIN_SIGNATURE_BITS:
        raise TooFewBitsError(
            f"N = {n} bits is below the minimum of {MIN_SIGNATURE_BITS}; "
            "increase the sweep span or the pigtail length"
        )
    return n


def snr_estimate(link: LinkBudget, bandwidth: float) -> float:
    """Linear SNR of the detected backscatter in bandwidth ``bandwidth``.

    Signal: R P^2 exp(-2 alpha d) R_RB / 2 (3 dB LO splitter, round trip loss).
    Noise: shot q P B plus detector R NEP^2 B.
    """
    _positive(bandwidth, "bandwidth")
    r = link.responsivity_a_per_w
    p = link.power_w
    signal = r * p**2 * math.exp(-2.0 * link.alpha_neper_per_m * link.distance_m) * link.r_rb / 2.0
    noise = link.electron_charge_c * p * bandwidth + r * link.nep_w_per_sqrt_hz**2 * bandwidth
    return signal / noise


def effective_measure_time(sweep: SweepConfig) -> float:
    return sweep.n_sw * sweep.t_sw


def check_sweep_time(sweep: SweepConfig, distance_m: float, length_m: float, v: float) -> None:
    round_trip = 2.0 * (distance_m + length_m) / v
    if round_trip > sweep.t_sw:
        raise ConstraintError(
            f"round trip 2(d+L)/v = {round_trip:.6g} s exceeds the sweep time "
            f"T_sw = {sweep.t_sw:.6g} s"
        )


def default_sample_rate(sweep: SweepConfig, distance_m: float, length_m: float, v: float) -> float:
    """Smallest sample rate with an integer sample count and one guard bin above
    the highest beat tone."""
    top_bin = beat_frequency(sweep.gamma, distance_m, length_m, v) * sweep.t_sw
    n_samples = 2 * (math.ceil(top_bin) + 1)
    return n_samples / sweep.t_sw


def _tone_sum(cycles_per_sample: np.ndarray, amplitudes: np.ndarray, n_samples: int) -> np.ndarray:
    # Re sum_k a_k exp(2 pi i nu_k n), evaluated blockwise as a matrix product
    # so long traces stay tractable.
    block = max(1, min(n_samples, math.isqrt(n_samples) * 4))
    n_blocks = -(-n_samples // block)
    tau = np.arange(block, dtype=float)
    inner = np.exp(2j * np.pi * np.mod(np.outer(tau, cycles_per_sample), 1.0))
    starts = np.arange(n_blocks, dtype=float) * block
    outer = amplitudes[:, None] * np.exp(
        2j * np.pi * np.mod(np.outer(cycles_per_sample, starts), 1.0)
    )
    out = (inner @ outer).real.T.ravel()
    return out[:n_samples]


def synthesize_trace(
    pigtail: FiberPigtail,
    sweep: SweepConfig,
    distance_m: float,
    v: float = DEFAULT_GROUP_VELOCITY,
    sample_rate_hz: float | None = None,
) -> Trace:
    """Noiseless dechirped beat signal of ``pigtail`` seen from distance ``distance_m``.

    Each scatterer contributes ``|r_k| cos(2 pi f_k t + arg r_k)``; the result
    is scaled to unit mean power.
    """
    if distance_m < 0:
        raise ParameterError("distance_m must be >= 0")
    check_sweep_time(sweep, distance_m, pigtail.length_m, v)
    f_max = beat_frequency(sweep.gamma, distance_m, pigtail.length_m, v)
    if sample_rate_hz is None:
        sample_rate_hz = default_sample_rate(sweep, distance_m, pigtail.length_m, v)
    _positive(sample_rate_hz, "sample_rate_hz")
    if sample_rate_hz < 2.0 * f_max * (1 - 1e-12):
        raise ConstraintError(
            f"sample rate {sample_rate_hz:.6g} Hz aliases beat tones up to {f_max:.6g} Hz"
        )
    n_samples = round(sample_rate_hz * sweep.t_sw)
    if pigtail.n_scatterers == 0:
        return Trace(_frozen(np.zeros(n_samples)), sample_rate_hz, sweep.t_sw)

    freqs = beat_frequency(sweep.gamma, distance_m, pigtail.positions_m, v)
    samples = _tone_sum(freqs / sample_rate_hz, pigtail.reflectivities, n_samples)
    power = float(np.mean(samples**2))
    if power > 0:
        samples = samples / math.sqrt(power)
    return Trace(_frozen(samples), sample_rate_hz, sweep.t_sw)


def inject_noise(trace: Trace, snr_linear: float, rng_seed) -> Trace:
    """Add white Gaussian noise of variance (mean signal power) / ``snr_linear``."""
    if math.isinf(snr_linear) and snr_linear > 0:
        return trace
    _positive(snr_linear, "snr_linear")
    if math.isfinite(trace.snr_linear):
        raise ParameterError("inject_noise expects a noiseless trace")
    sigma = math.sqrt(trace.mean_power / snr_linear)
    rng = np.random.default_rng(rng_seed)
    noisy = trace.samples + sigma * rng.standard_normal(trace.n_samples)
    return Trace(_frozen(noisy), trace.sample_rate_hz, trace.t_sw, snr_linear)


def average_traces(traces: Sequence[Trace]) -> Trace:
    """Element-wise mean. Independent noise variance drops by ``len(traces)``."""
    if not traces:
        raise ShapeMismatchError("cannot average an empty list of traces")
    first = traces[0]
    for tr in traces[1:]:
        if tr.n_samples != first.n_samples or tr.sample_rate_hz != first.sample_rate_hz:
            raise ShapeMismatchError("traces differ in length or sample rate")
    if len(traces) == 1:
        return first
    mean = np.mean(np.stack([tr.samples for tr in traces]), axis=0)
    inv = sum(1.0 / tr.snr_linear for tr in traces) / len(traces) ** 2
    snr = math.inf if inv == 0 else 1.0 / inv
    return Trace(_frozen(mean), first.sample_rate_hz, first.t_sw, snr)
