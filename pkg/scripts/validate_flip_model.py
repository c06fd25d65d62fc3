"""Empirical bit-flip rate of the full signal chain against the arctan model."""

import argparse
import math

from fiberid.experiments import estimate_p_flip
from fiberid.identify import p_flip_from_snr
from fiberid.physics import LinkBudget, SweepConfig, generate_pigtail

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--trials", type=int, default=1000)
parser.add_argument("--seed", type=int, default=2024)
parser.add_argument("--workers", type=int, default=1)
args = parser.parse_args()

link = LinkBudget(power_w=1e-3, distance_m=0.0, group_velocity_m_per_s=2e8)
sweep = SweepConfig(10e9, 1e-5)
template = generate_pigtail(0, 0.5)
for snr_db in (0, 5, 10, 15, 20, 25, 30):
    snr = 10 ** (snr_db / 10)
    est = estimate_p_flip(template, sweep, link, snr, args.trials, args.seed, workers=args.workers)
    p = p_flip_from_snr(snr)
    z = (est.p - p) / math.sqrt(p * (1 - p) / est.bits)
    print(f"SNR {snr_db:2d} dB  model {p:.5f}  measured {est.p:.5f}  [{est.ci_low:.5f}, {est.ci_high:.5f}]  z={z:+.2f}")
