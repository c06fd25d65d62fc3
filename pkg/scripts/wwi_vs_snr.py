"""Weighted wrong identification versus SNR for 10, 25 and 50 GHz sweeps.

Points whose analytic WWI exceeds 10 / trials also get a direct Monte-Carlo
estimate; pass --trials 0 to skip it.
"""

import argparse
import math

from fiberid.experiments import CurveSpec, paper_link, reliability_curve, write_table
from fiberid.physics import SweepConfig

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--out", default="results/wwi_vs_snr.csv")
parser.add_argument("--trials", type=int, default=2000)
parser.add_argument("--seed", type=int, default=0)
parser.add_argument("--workers", type=int, default=1)
args = parser.parse_args()

spec = CurveSpec(
    "snr_db",
    tuple(float(s) for s in range(-6, 31)),
    paper_link(distance_m=0.0, v=2e8),
    SweepConfig(10e9, 1e-5),
    delta_fs_hz=(10e9, 25e9, 50e9),
    trials=max(args.trials, 1),
    master_seed=args.seed,
    workers=args.workers,
    output_path=args.out,
)
table = reliability_curve(spec, monte_carlo=args.trials > 0)
write_table(table, args.out, spec)
for snr_db, df, n, t, log_wwi, mc in table.rows:
    if snr_db in (0.0, 7.0, 10.0, 20.0, 30.0):
        mc_txt = f"  MC {math.log10(mc):7.2f}" if mc else ""
        print(f"{df / 1e9:4.0f} GHz  N={n:3d}  SNR {snr_db:5.1f} dB  t*={t:3d}  log10 WWI {log_wwi:8.2f}{mc_txt}")
print(f"wrote {args.out}")
