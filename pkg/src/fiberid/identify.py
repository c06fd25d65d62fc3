"""Hamming-distance identification and its binomial error analysis.

A measured signature differs from the enrolled one by independent bit flips
with probability ``p_intra``; a different fiber agrees bit-by-bit by chance,
``p_inter = 0.5``.  The accept threshold t is placed where the false-positive
tail P(Bin(N, p_inter) <= t) and false-negative tail P(Bin(N, p_intra) > t)
cross, and the weighted wrong identification is r FP + (1 - r) FN.
All tail arithmetic runs in the log domain so values far below 1e-20 are exact
to a few ulps of the log.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
import threading
import warnings
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from scipy.special import gammaln, xlog1py, xlogy

from .errors import DuplicateLabelError, ParameterError, ShapeMismatchError, UnknownLabelError
from .physics import signature_length
from .sigproc import Signature

LN10 = math.log(10.0)


class DegenerateModelWarning(UserWarning):
    """p_intra >= p_inter: genuine and impostor distances are indistinguishable."""


def hamming(a: Signature, b: Signature) -> int:
    if a.n_bits != b.n_bits:
        raise ShapeMismatchError(f"cannot compare {a.n_bits}-bit and {b.n_bits}-bit signatures")
    xa = np.frombuffer(a.packed, dtype=np.uint8)
    xb = np.frombuffer(b.packed, dtype=np.uint8)
    return int(np.unpackbits(xa ^ xb, count=a.n_bits).sum())


def p_flip_from_snr(snr_linear: float) -> float:
    """Probability that Gaussian noise at relative power 1/SNR flips the sign
    of a zero-mean Gaussian sample: 1/2 - arctan(sqrt(SNR)) / pi."""
    if math.isnan(snr_linear) or snr_linear < 0:
        raise ParameterError(f"SNR must be >= 0, got {snr_linear!r}")
    if math.isinf(snr_linear):
        return 0.0
    return 0.5 - math.atan(math.sqrt(snr_linear)) / math.pi


def _check_binomial(n: int, p: float) -> None:
    if int(n) != n or n < 0:
        raise ParameterError(f"n must be a non-negative integer, got {n!r}")
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"p must lie in [0, 1], got {p!r}")


def binomial_log_pmf(n: int, p: float) -> np.ndarray:
    """Natural-log pmf of Binomial(n, p) on k = 0..n."""
    _check_binomial(n, p)
    k = np.arange(n + 1, dtype=float)
    log_choose = gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)
    return log_choose + xlogy(k, p) + xlog1py(n - k, -p)


def binomial_log_tails(n: int, p: float) -> tuple[np.ndarray, np.ndarray]:
    """ln P(X <= t) and ln P(X > t) for every t in 0..n."""
    log_pmf = binomial_log_pmf(n, p)
    lower = np.logaddexp.accumulate(log_pmf)
    upper = np.empty(n + 1)
    upper[:-1] = np.logaddexp.accumulate(log_pmf[::-1])[::-1][1:]
    upper[-1] = -np.inf
    # lower[n] is ln 1 up to rounding
    lower[-1] = 0.0
    return lower, upper


def binomial_tail_log(n: int, p: float, t: int, side: str = "lower") -> float:
    """log10 of P(X <= t) (``side="lower"``) or P(X > t) (``side="upper"``)."""
    _check_binomial(n, p)
    if int(t) != t or not 0 <= t <= n:
        raise ParameterError(f"t must be an integer in [0, {n}], got {t!r}")
    if side not in ("lower", "upper"):
        raise ParameterError(f"side must be 'lower' or 'upper', got {side!r}")
    lower, upper = binomial_log_tails(n, p)
    return float((lower if side == "lower" else upper)[int(t)] / LN10)


@dataclass(frozen=True)
class DecisionModel:
    n_bits: int
    p_intra: float
    p_inter: float
    r_weight: float
    threshold: int
    log10_fp: float
    log10_fn: float
    log10_wwi: float

    @property
    def fp(self) -> float:
        return 10.0**self.log10_fp

    @property
    def fn(self) -> float:
        return 10.0**self.log10_fn

    @property
    def wwi(self) -> float:
        return 10.0**self.log10_wwi

    def accepts(self, distance: int) -> bool:
        return distance <= self.threshold


def _log_weighted(r: float, log_fp, log_fn):
    with np.errstate(divide="ignore"):
        return np.logaddexp(np.log(r) + log_fp, np.log1p(-r) + log_fn)


def calibrate_threshold(
    n_bits: int, p_intra: float, p_inter: float = 0.5, r_weight: float = 0.5
) -> DecisionModel:
    """Integer threshold minimizing |log FP(t) - log FN(t)|; ties go to the smaller t."""
    if not 0.0 <= r_weight <= 1.0:
        raise ParameterError(f"r_weight must lie in [0, 1], got {r_weight!r}")
    if not 0.0 <= p_intra <= 0.5 or not 0.0 < p_inter <= 0.5:
        raise ParameterError("flip probabilities must lie in [0, 0.5]")
    if p_intra >= p_inter:
        warnings.warn(
            f"p_intra={p_intra} >= p_inter={p_inter}: identification is impossible",
            DegenerateModelWarning,
            stacklevel=2,
        )
    log_fp, _ = binomial_log_tails(n_bits, p_inter)
    _, log_fn = binomial_log_tails(n_bits, p_intra)
    with np.errstate(invalid="ignore"):
        gap = np.abs(log_fp - log_fn)
    gap[~np.isfinite(gap)] = np.inf
    t = int(np.argmin(gap))
    log_wwi = float(_log_weighted(r_weight, log_fp[t], log_fn[t]))
    return DecisionModel(
        n_bits=n_bits,
        p_intra=p_intra,
        p_inter=p_inter,
        r_weight=r_weight,
        threshold=t,
        log10_fp=float(log_fp[t] / LN10),
        log10_fn=float(log_fn[t] / LN10),
        log10_wwi=log_wwi / LN10,
    )


def decision_for_snr(
    snr_linear: float, delta_f: float, length_m: float, v: float, r: float = 0.5
) -> DecisionModel:
    n_bits = signature_length(delta_f, length_m, v)
    return calibrate_threshold(n_bits, p_flip_from_snr(snr_linear), 0.5, r)


def wwi_vs_snr(
    snr_linear: float, delta_f: float, length_m: float, v: float, r: float = 0.5
) -> tuple[int, float]:
    """Operating point (threshold, log10 WWI) at a given in-band SNR."""
    model = decision_for_snr(snr_linear, delta_f, length_m, v, r)
    return model.threshold, model.log10_wwi


@dataclass(frozen=True)
class EnrollmentRecord:
    label: str
    signature: Signature
    created_at: datetime
    decision: DecisionModel | None = None


@dataclass(frozen=True)
class VerifyReport:
    accepted: bool
    distance: int
    threshold: int
    margin: int
    log10_wwi: float


class Registry:
    """Enrolled signatures keyed by label, optionally persisted to a JSON file.

    Writes are serialized by a lock and land on disk through an atomic
    replace, so readers of the file never see a partial document.
    """

    def __init__(self, path=None):
        self.path = Path(path) if path is not None else None
        self._records: dict[str, EnrollmentRecord] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            self._records = _load_records(self.path)

    def __len__(self):
        return len(self._records)

    def __contains__(self, label):
        return label in self._records

    def labels(self) -> list[str]:
        return list(self._records)

    def record(self, label: str) -> EnrollmentRecord:
        try:
            return self._records[label]
        except KeyError:
            raise UnknownLabelError(label) from None

    def lookup(self, label: str) -> Signature:
        return self.record(label).signature

    def enroll(self, label: str, signature: Signature, created_at: datetime | None = None):
        if created_at is None:
            created_at = datetime.now(timezone.utc)
        with self._lock:
            if label in self._records:
                raise DuplicateLabelError(label)
            records = dict(self._records)
            records[label] = EnrollmentRecord(label, signature.with_label(label), created_at)
            if self.path is not None:
                _dump_records(self.path, records)
            self._records = records
        return self

    def verify(self, label: str, measured: Signature, decision: DecisionModel) -> VerifyReport:
        enrolled = self.lookup(label)
        distance = hamming(measured, enrolled)
        return VerifyReport(
            accepted=decision.accepts(distance),
            distance=distance,
            threshold=decision.threshold,
            margin=decision.threshold - distance,
            log10_wwi=decision.log10_wwi,
        )


def enroll(registry: Registry, label: str, signature: Signature) -> Registry:
    return registry.enroll(label, signature)


def verify(registry: Registry, label: str, measured: Signature, decision: DecisionModel):
    return registry.verify(label, measured, decision)


def _record_to_json(rec: EnrollmentRecord) -> dict:
    sig = rec.signature
    return {
        "n_bits": sig.n_bits,
        "delta_f_hz": sig.delta_f,
        "length_m": sig.length_m,
        "bits": sig.hex,
        "created_at": rec.created_at.astimezone(timezone.utc).isoformat(),
    }


def _load_records(path: Path) -> dict[str, EnrollmentRecord]:
    doc = json.loads(path.read_text(encoding="utf-8"))
    records = {}
    for label, entry in doc.items():
        sig = Signature(
            bytes.fromhex(entry["bits"]),
            int(entry["n_bits"]),
            delta_f=float(entry["delta_f_hz"]),
            length_m=float(entry["length_m"]),
            label=label,
        )
        created = datetime.fromisoformat(entry["created_at"])
        records[label] = EnrollmentRecord(label, sig, created)
    return records


def _dump_records(path: Path, records: dict[str, EnrollmentRecord]) -> None:
    doc = {label: _record_to_json(rec) for label, rec in records.items()}
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
