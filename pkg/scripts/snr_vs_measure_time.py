"""SNR versus total measure time for several launch powers and distances."""

import argparse

from fiberid.experiments import CurveSpec, paper_link, snr_curve, write_table
from fiberid.physics import SweepConfig, dbm_to_watt

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--out", default="results/snr_vs_time.csv")
parser.add_argument("--v", type=float, default=2e8, help="group velocity, m/s")
args = parser.parse_args()

grid = tuple(10.0 ** (e / 4) for e in range(-28, -11))  # 1e-7 .. 1e-3 s
spec = CurveSpec(
    "measure_time_s",
    grid,
    paper_link(v=args.v),
    SweepConfig(25e9, 1e-4),
    powers_w=tuple(dbm_to_watt(p) for p in (-10, 0, 10)),
    distances_m=(0.0, 1e3, 10e3),
    output_path=args.out,
)
table = snr_curve(spec)
write_table(table, args.out, spec)
for p, d, t, _, snr in table.rows:
    if t == grid[-5]:
        print(f"P = {p * 1e3:6.2f} mW  d = {d / 1e3:5.1f} km  T = {t:.1e} s  SNR = {snr:6.2f} dB")
print(f"wrote {args.out}")
