"""SNR-budget and reliability curves, and Monte-Carlo checks of the flip model.

Every random draw is seeded from ``(master_seed, stream, point, trial)``
through :class:`numpy.random.SeedSequence`, so a trial's outcome does not
depend on which worker ran it or in what order.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from scipy.stats import binomtest

from . import __version__
from .identify import decision_for_snr, hamming
from .physics import (
    DEFAULT_GROUP_VELOCITY,
    FiberPigtail,
    LinkBudget,
    SweepConfig,
    generate_pigtail,
    linear_to_db,
    signature_length,
    snr_estimate,
    synthesize_trace,
)
from .sigproc import noisy_measurement, signature_from_trace

NOISE_STREAM = 0
PIGTAIL_STREAM = 1
IMPOSTOR_STREAM = 2


def derive_seed(master_seed: int, stream: int, *index: int) -> int:
    seq = np.random.SeedSequence([master_seed, stream, *index])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class CurveSpec:
    """One experiment: a grid over ``variable`` plus optional extra series axes.

    ``variable`` is ``"measure_time_s"`` for SNR curves and ``"snr_db"`` for
    reliability curves.  Empty series fall back to the value in ``link`` or
    ``sweep``.
    """

    variable: str
    grid: tuple[float, ...]
    link: LinkBudget
    sweep: SweepConfig
    length_m: float = 0.5
    trials: int = 1
    master_seed: int = 0
    output_path: str | None = None
    powers_w: tuple[float, ...] = ()
    distances_m: tuple[float, ...] = ()
    delta_fs_hz: tuple[float, ...] = ()
    r_weight: float = 0.5
    n_scatterers: int = 1000
    workers: int = 1

    def __post_init__(self):
        if not self.grid:
            raise ValueError("grid must not be empty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("grid must be strictly increasing")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.length_m <= 0:
            raise ValueError("length_m must be positive")


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_table(table: Table, path, spec: CurveSpec | None = None) -> Path:
    """CSV with a header row plus a ``<path>.meta.json`` sidecar describing the run."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_cell(v) for v in row])
    meta: dict[str, Any] = {"tool": "fiberid", "version": __version__, "columns": list(table.columns)}
    if spec is not None:
        meta["spec"] = dataclasses.asdict(spec)
    sidecar = path.with_name(path.name + ".meta.json")
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return sidecar


def snr_curve(spec: CurveSpec) -> Table:
    """SNR versus total measure time for each (power, distance) pair.

    A measure time T behaves like one sweep of duration T, so the noise
    bandwidth is 2 L delta_f / (v T).
    """
    link = spec.link
    v = link.group_velocity_m_per_s
    powers = spec.powers_w or (link.power_w,)
    distances = spec.distances_m or (link.distance_m,)
    table = Table(("power_w", "distance_m", "measure_time_s", "bandwidth_hz", "snr_db"))
    for p in powers:
        for d in distances:
            point = dataclasses.replace(link, power_w=p, distance_m=d)
            for t in spec.grid:
                b = 2.0 * spec.length_m * spec.sweep.delta_f / (v * t)
                table.rows.append((float(p), float(d), float(t), b, linear_to_db(snr_estimate(point, b))))
    return table


@dataclass(frozen=True)
class FlipEstimate:
    flips: int
    bits: int
    ci_low: float
    ci_high: float

    @property
    def p(self) -> float:
        return self.flips / self.bits


def _flip_trial(args) -> int:
    template, sweep, link, snr, master_seed, i, fresh = args
    v = link.group_velocity_m_per_s
    if fresh:
        pig = generate_pigtail(
            derive_seed(master_seed, PIGTAIL_STREAM, i),
            template.length_m, template.n_scatterers, template.r_rb,
        )
    else:
        pig = template
    clean = synthesize_trace(pig, sweep, link.distance_m, v)
    ref = signature_from_trace(clean, sweep, link.distance_m, pig.length_m, v)
    if math.isinf(snr):
        return 0
    noisy = noisy_measurement(
        clean, sweep.n_sw, snr, ref.n_bits, derive_seed(master_seed, NOISE_STREAM, i)
    )
    return hamming(ref, signature_from_trace(noisy, sweep, link.distance_m, pig.length_m, v))


def _run(fn, tasks, workers: int) -> list:
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def estimate_p_flip(
    pigtail: FiberPigtail,
    sweep: SweepConfig,
    link: LinkBudget,
    snr_linear: float,
    trials: int,
    master_seed: int,
    *,
    fresh_pigtails: bool = True,
    workers: int = 1,
) -> FlipEstimate:
    """Pooled bit-flip fraction of noisy measurements against the noiseless signature.

    With ``fresh_pigtails`` each trial draws its own pigtail (with the
    template's length, scatterer count and reflectivity) so the pooled bits
    sample the speckle ensemble instead of one fixed realization.
    """
    if trials < 100:
        raise ValueError("estimate_p_flip needs at least 100 trials")
    tasks = [(pigtail, sweep, link, snr_linear, master_seed, i, fresh_pigtails) for i in range(trials)]
    flips = sum(_run(_flip_trial, tasks, workers))
    n_bits = signature_length(sweep.delta_f, pigtail.length_m, link.group_velocity_m_per_s)
    total = n_bits * trials
    ci = binomtest(flips, total).proportion_ci(confidence_level=0.95)
    return FlipEstimate(flips, total, float(ci.low), float(ci.high))


def _wwi_trial(args) -> tuple[bool, bool]:
    """One genuine and one impostor attempt; returns (false_negative, false_positive)."""
    spec, sweep, snr, threshold, point, i = args
    link = dataclasses.replace(spec.link, distance_m=0.0)
    v = link.group_velocity_m_per_s
    L = spec.length_m
    owner = generate_pigtail(
        derive_seed(spec.master_seed, PIGTAIL_STREAM, point, i), L, spec.n_scatterers, spec.link.r_rb
    )
    other = generate_pigtail(
        derive_seed(spec.master_seed, IMPOSTOR_STREAM, point, i), L, spec.n_scatterers, spec.link.r_rb
    )
    clean_owner = synthesize_trace(owner, sweep, 0.0, v)
    clean_other = synthesize_trace(other, sweep, 0.0, v)
    enrolled = signature_from_trace(clean_owner, sweep, 0.0, L, v)
    n = enrolled.n_bits
    genuine = noisy_measurement(
        clean_owner, sweep.n_sw, snr, n, derive_seed(spec.master_seed, NOISE_STREAM, point, 2 * i)
    )
    impostor = noisy_measurement(
        clean_other, sweep.n_sw, snr, n, derive_seed(spec.master_seed, NOISE_STREAM, point, 2 * i + 1)
    )
    d_gen = hamming(enrolled, signature_from_trace(genuine, sweep, 0.0, L, v))
    d_imp = hamming(enrolled, signature_from_trace(impostor, sweep, 0.0, L, v))
    return d_gen > threshold, d_imp <= threshold


def reliability_curve(spec: CurveSpec, monte_carlo: bool = True) -> Table:
    """Semi-analytic WWI over (delta_f, SNR), with a direct Monte-Carlo estimate
    wherever the analytic value exceeds 10 / trials.

    Monte-Carlo trials run at zero distance: with no dispersion the
    identification statistics at a given in-band SNR do not depend on d,
    and the trace stays short.
    """
    v = spec.link.group_velocity_m_per_s
    delta_fs = spec.delta_fs_hz or (spec.sweep.delta_f,)
    table = Table(("snr_db", "delta_f_hz", "n_bits", "threshold", "log10_wwi", "mc_wwi"))
    point = 0
    for df in delta_fs:
        sweep = SweepConfig(df, spec.sweep.t_sw, spec.sweep.n_sw)
        for snr_db in spec.grid:
            snr = 10.0 ** (snr_db / 10.0)
            model = decision_for_snr(snr, df, spec.length_m, v, spec.r_weight)
            mc = None
            if monte_carlo and model.wwi > 10.0 / spec.trials:
                tasks = [(spec, sweep, snr, model.threshold, point, i) for i in range(spec.trials)]
                outcomes = _run(_wwi_trial, tasks, spec.workers)
                fn = sum(o[0] for o in outcomes) / spec.trials
                fp = sum(o[1] for o in outcomes) / spec.trials
                mc = spec.r_weight * fp + (1.0 - spec.r_weight) * fn
            table.rows.append(
                (float(snr_db), float(df), model.n_bits, model.threshold, model.log10_wwi, mc)
            )
            point += 1
    return table


def paper_link(power_w: float = 1e-3, distance_m: float = 10e3, v: float = DEFAULT_GROUP_VELOCITY) -> LinkBudget:
    """Link budget with the reference detector and fiber values."""
    return LinkBudget(power_w=power_w, distance_m=distance_m, group_velocity_m_per_s=v)
