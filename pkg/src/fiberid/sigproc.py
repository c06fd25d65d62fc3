"""From detected trace to N-bit signature: band selection, decimation, 1-bit ADC.

The band holding the pigtail's beat tones, [gamma 2d/v, gamma 2(d+L)/v], is cut
out with a brick-wall mask on the DFT bins, shifted to baseband and brought
back to the time domain on an N-point grid (rate 2B). The real part of that
sequence goes through a 2-level quantizer.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConstraintError, ParameterError, ShapeMismatchError, TooFewBitsError
from .physics import (
    MIN_SIGNATURE_BITS,
    FiberPigtail,
    LinkBudget,
    SweepConfig,
    Trace,
    average_traces,
    beat_frequency,
    inject_noise,
    rbp_bandwidth,
    signature_length,
    snr_estimate,
    synthesize_trace,
)

FILE_MAGIC = "FPRINT v1"


@dataclass(frozen=True)
class Signature:
    """Packed bit vector; bit i belongs to the i-th retained sample, MSB-first packing."""

    packed: bytes
    n_bits: int
    delta_f: float = 0.0
    length_m: float = 0.0
    distance_hint_m: float | None = None
    label: str = ""

    def __post_init__(self):
        if self.n_bits < MIN_SIGNATURE_BITS:
            raise TooFewBitsError(f"signature needs at least {MIN_SIGNATURE_BITS} bits")
        if len(self.packed) != -(-self.n_bits // 8):
            raise ShapeMismatchError("packed byte count does not match n_bits")

    @classmethod
    def from_bits(cls, bits, **meta) -> Signature:
        arr = np.asarray(bits, dtype=np.uint8)
        if arr.ndim != 1 or np.any(arr > 1):
            raise ParameterError("bits must be a 1-D sequence of 0/1")
        return cls(np.packbits(arr).tobytes(), int(arr.size), **meta)

    @property
    def bits(self) -> np.ndarray:
        raw = np.frombuffer(self.packed, dtype=np.uint8)
        return np.unpackbits(raw, count=self.n_bits)

    @property
    def hex(self) -> str:
        return self.packed.hex()

    def complement(self) -> Signature:
        return Signature.from_bits(
            1 - self.bits,
            delta_f=self.delta_f,
            length_m=self.length_m,
            distance_hint_m=self.distance_hint_m,
            label=self.label,
        )

    def with_label(self, label: str) -> Signature:
        return Signature(
            self.packed, self.n_bits, self.delta_f, self.length_m, self.distance_hint_m, label
        )


def band_bins(sweep: SweepConfig, distance_m: float, length_m: float, v: float, n_bits: int):
    """First DFT bin of the pigtail band and the number of bins kept."""
    k_lo = beat_frequency(sweep.gamma, distance_m, 0.0, v) * sweep.t_sw
    return round(k_lo), -(-n_bits // 2)


def extract_band(
    trace: Trace, sweep: SweepConfig, distance_m: float, length_m: float, v: float
) -> np.ndarray:
    """Complex baseband of the pigtail band, N samples over one sweep."""
    bandwidth = rbp_bandwidth(sweep.gamma, length_m, v)
    if bandwidth > sweep.delta_f:
        raise ConstraintError(f"B = {bandwidth:.6g} Hz exceeds the sweep span {sweep.delta_f:.6g} Hz")
    f_hi = beat_frequency(sweep.gamma, distance_m, length_m, v)
    if f_hi > trace.sample_rate_hz / 2 * (1 + 1e-12):
        raise ConstraintError(
            f"band edge {f_hi:.6g} Hz lies above Nyquist {trace.sample_rate_hz / 2:.6g} Hz"
        )
    n_bits = signature_length(sweep.delta_f, length_m, v)
    k0, n_keep = band_bins(sweep, distance_m, length_m, v, n_bits)
    spectrum = np.fft.rfft(trace.samples)
    if k0 + n_keep > spectrum.size:
        raise ConstraintError("pigtail band extends past the last DFT bin of the trace")
    shifted = np.zeros(n_bits, dtype=complex)
    shifted[:n_keep] = spectrum[k0 : k0 + n_keep]
    # scale so the real part reproduces the band-limited waveform amplitude
    return np.fft.ifft(shifted) * (2.0 * n_bits / trace.n_samples)


def quantize_to_signature(baseband, n_bits: int, **meta) -> Signature:
    """2-level ADC on the real part: bit = 1 where the sample is >= 0."""
    values = np.real(np.asarray(baseband))
    if values.size < n_bits:
        raise ShapeMismatchError(f"need {n_bits} samples, got {values.size}")
    return Signature.from_bits((values[:n_bits] >= 0).astype(np.uint8), **meta)


def noise_snr_for_band(snr_in_band: float, trace: Trace, n_bits: int) -> float:
    """Per-sample trace SNR that leaves ``snr_in_band`` after band extraction.

    White noise spread over n_s/2 positive bins keeps the fraction
    ceil(N/2) / (n_s/2) inside the band; the signal lies wholly inside it.
    """
    n_keep = -(-n_bits // 2)
    return snr_in_band * 2.0 * n_keep / trace.n_samples


def noisy_measurement(clean: Trace, n_sw: int, snr_linear: float, n_bits: int, rng_seed) -> Trace:
    """Average ``n_sw`` independently noised copies of ``clean``.

    ``snr_linear`` is the in-band SNR after averaging.
    """
    per_sweep = noise_snr_for_band(snr_linear / n_sw, clean, n_bits)
    children = np.random.SeedSequence(rng_seed).spawn(n_sw)
    return average_traces([inject_noise(clean, per_sweep, child) for child in children])


def signature_from_trace(
    trace: Trace, sweep: SweepConfig, distance_m: float, length_m: float, v: float, label: str = ""
) -> Signature:
    n_bits = signature_length(sweep.delta_f, length_m, v)
    baseband = extract_band(trace, sweep, distance_m, length_m, v)
    return quantize_to_signature(
        baseband,
        n_bits,
        delta_f=sweep.delta_f,
        length_m=length_m,
        distance_hint_m=distance_m,
        label=label,
    )


def measure_signature(
    pigtail: FiberPigtail,
    sweep: SweepConfig,
    link: LinkBudget,
    rng_seed=None,
    *,
    snr_linear: float | None = None,
    sample_rate_hz: float | None = None,
    label: str = "",
) -> Signature:
    """Interrogate ``pigtail`` and return its signature.

    ``rng_seed=None`` gives the noiseless enrollment signature.  Otherwise
    ``sweep.n_sw`` noisy sweeps are averaged.  The SNR after averaging is
    ``snr_linear`` when given, else the link budget over the measure-time
    bandwidth 2 L delta_f / (v n_sw T_sw).
    """
    v = link.group_velocity_m_per_s
    d = link.distance_m
    n_bits = signature_length(sweep.delta_f, pigtail.length_m, v)
    trace = synthesize_trace(pigtail, sweep, d, v, sample_rate_hz)
    if rng_seed is not None:
        if snr_linear is None:
            b_eff = rbp_bandwidth(sweep.gamma, pigtail.length_m, v) / sweep.n_sw
            snr_linear = snr_estimate(link, b_eff)
        trace = noisy_measurement(trace, sweep.n_sw, snr_linear, n_bits, rng_seed)
    return signature_from_trace(trace, sweep, d, pigtail.length_m, v, label)


def format_signature(sig: Signature) -> str:
    if "\n" in sig.label or "\r" in sig.label:
        raise ParameterError("signature labels cannot contain line breaks")
    return (
        f"{FILE_MAGIC}\n"
        f"n_bits={sig.n_bits}\n"
        f"delta_f_hz={sig.delta_f!r}\n"
        f"length_m={sig.length_m!r}\n"
        f"label={sig.label}\n"
        f"{sig.hex}\n"
    )


def parse_signature(text: str) -> Signature:
    lines = text.splitlines()
    if len(lines) < 6 or lines[0] != FILE_MAGIC:
        raise ParameterError("not a FPRINT v1 signature document")
    fields = {}
    for line, key in zip(lines[1:5], ("n_bits", "delta_f_hz", "length_m", "label")):
        name, sep, value = line.partition("=")
        if not sep or name != key:
            raise ParameterError(f"expected header field {key!r}, got {line!r}")
        fields[key] = value
    n_bits = int(fields["n_bits"])
    hex_bits = lines[5].strip()
    try:
        packed = bytes.fromhex(hex_bits)
    except ValueError as exc:
        raise ParameterError(f"malformed hex payload: {exc}") from None
    if hex_bits != hex_bits.lower():
        raise ParameterError("hex payload must be lowercase")
    sig = Signature(
        packed,
        n_bits,
        delta_f=float(fields["delta_f_hz"]),
        length_m=float(fields["length_m"]),
        label=fields["label"],
    )
    if n_bits % 8 and packed[-1] & ((1 << (8 - n_bits % 8)) - 1):
        raise ParameterError("padding bits in the final byte must be zero")
    return sig


def write_signature(sig: Signature, path) -> None:
    Path(path).write_text(format_signature(sig), encoding="utf-8")


def read_signature(path) -> Signature:
    return parse_signature(Path(path).read_text(encoding="utf-8"))
