"""Command-line front end.

Exit codes: 0 success or accept, 1 internal error, 2 usage/config error,
3 verification reject.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys

from .config import ConfigError, RunConfig, load_config
from .errors import DuplicateLabelError, ParameterError, UnknownLabelError
from .experiments import CurveSpec, Table, reliability_curve, snr_curve, write_table
from .identify import Registry, decision_for_snr
from .physics import (
    generate_pigtail,
    linear_to_db,
    rbp_bandwidth,
    snr_estimate,
)
from .sigproc import measure_signature, read_signature, write_signature
from .trxctl import TrxState, enter_identification, exit_identification, plan_identification

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_REJECT = 3

log = logging.getLogger("fiberid")


class UsageError(Exception):
    pass


def _emit_table(table: Table, args, spec: CurveSpec | None) -> None:
    if args.out:
        write_table(table, args.out, spec)
        log.info("wrote %s", args.out)
        return
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow(["" if v is None else format(v, ".17g") if isinstance(v, float) else v for v in row])
    sys.stdout.write(buf.getvalue())


def _master_seed(cfg: RunConfig, args) -> int:
    return cfg.master_seed if args.seed is None else args.seed


def cmd_snr(cfg: RunConfig, args) -> int:
    if not cfg.measure_times_s:
        raise ConfigError("experiment.measure_times_s must list at least one measure time")
    spec = CurveSpec(
        "measure_time_s", cfg.measure_times_s, cfg.link, cfg.sweep,
        length_m=cfg.pigtail_length_m, master_seed=_master_seed(cfg, args),
        output_path=args.out, powers_w=cfg.powers_w, distances_m=cfg.distances_m,
    )
    _emit_table(snr_curve(spec), args, spec)
    return EXIT_OK


def cmd_reliability(cfg: RunConfig, args) -> int:
    if not cfg.snr_db:
        raise ConfigError("experiment.snr_db must list at least one SNR")
    spec = CurveSpec(
        "snr_db", cfg.snr_db, cfg.link, cfg.sweep,
        length_m=cfg.pigtail_length_m, trials=cfg.trials, master_seed=_master_seed(cfg, args),
        output_path=args.out, delta_fs_hz=cfg.delta_fs_hz, r_weight=cfg.r_weight,
        n_scatterers=cfg.pigtail_n_scatterers, workers=cfg.workers,
    )
    _emit_table(reliability_curve(spec, monte_carlo=cfg.monte_carlo), args, spec)
    return EXIT_OK


def _pigtail(cfg: RunConfig, args):
    seed = cfg.pigtail_seed if args.pigtail_seed is None else args.pigtail_seed
    return generate_pigtail(seed, cfg.pigtail_length_m, cfg.pigtail_n_scatterers, cfg.link.r_rb)


def _link_snr(cfg: RunConfig) -> float:
    v = cfg.link.group_velocity_m_per_s
    b = rbp_bandwidth(cfg.sweep.gamma, cfg.pigtail_length_m, v) / cfg.sweep.n_sw
    return snr_estimate(cfg.link, b)


def _measurement_snr(cfg: RunConfig) -> float:
    if cfg.identify_snr_db is not None:
        return 10.0 ** (cfg.identify_snr_db / 10.0)
    return _link_snr(cfg)


def cmd_measure(cfg: RunConfig, args) -> int:
    pig = _pigtail(cfg, args)
    seed = None if args.noiseless else (0 if args.seed is None else args.seed)
    snr = None if seed is None else _measurement_snr(cfg)
    sig = measure_signature(pig, cfg.sweep, cfg.link, seed, snr_linear=snr, label=args.label or "")
    if not args.out:
        raise UsageError("measure needs --out")
    write_signature(sig, args.out)
    return EXIT_OK


def cmd_enroll(cfg: RunConfig, args) -> int:
    registry = Registry(cfg.registry_path)
    sig = measure_signature(_pigtail(cfg, args), cfg.sweep, cfg.link, label=args.label)
    try:
        registry.enroll(args.label, sig)
    except DuplicateLabelError:
        raise UsageError(f"label {args.label!r} is already enrolled") from None
    if args.out:
        write_signature(sig.with_label(args.label), args.out)
    print(f"enrolled {args.label}: {sig.n_bits} bits")
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args) -> int:
    registry = Registry(cfg.registry_path)
    if args.label not in registry:
        raise UsageError(f"unknown label {args.label!r}")
    snr = _measurement_snr(cfg)
    if args.signature:
        measured = read_signature(args.signature)
    else:
        seed = 0 if args.seed is None else args.seed
        measured = measure_signature(_pigtail(cfg, args), cfg.sweep, cfg.link, seed, snr_linear=snr)
    decision = decision_for_snr(
        snr, cfg.sweep.delta_f, cfg.pigtail_length_m, cfg.link.group_velocity_m_per_s, cfg.r_weight
    )
    report = registry.verify(args.label, measured, decision)
    verdict = "accept" if report.accepted else "reject"
    print(
        f"{verdict} label={args.label} distance={report.distance} threshold={report.threshold} "
        f"margin={report.margin} log10_wwi={report.log10_wwi:.4f} snr_db={linear_to_db(snr):.3f}"
    )
    return EXIT_OK if report.accepted else EXIT_REJECT


def cmd_plan(cfg: RunConfig, args) -> int:
    target = cfg.target_log10_wwi if args.target is None else args.target
    plan = plan_identification(cfg.link, cfg.sweep, cfg.pigtail_length_m, target, cfg.r_weight)
    print(f"target_log10_wwi={target:g}")
    print(f"feasible={'yes' if plan.feasible else 'no'}")
    if plan.reason:
        print(f"reason={plan.reason}")
    print(f"required_snr_db={plan.required_snr_db:.4f}")
    print(f"required_measure_time_s={plan.required_measure_time_s:.6g}")
    print(f"n_sw={plan.n_sw}")
    print(f"downtime_s={plan.downtime_s:.6g}")
    print(f"achieved_log10_wwi={plan.achieved_log10_wwi:.4f}")
    return EXIT_OK


def cmd_session(cfg: RunConfig, args) -> int:
    state = TrxState()
    print(f"mode={state.mode.value} port1={state.sw_port1.value} port2={state.sw_port2.value}")
    state = enter_identification(state, cfg.sweep)
    print(f"mode={state.mode.value} port1={state.sw_port1.value} port2={state.sw_port2.value}")
    print(f"snr_db={linear_to_db(_link_snr(cfg)):.4f}")
    state, downtime = exit_identification(state)
    print(f"mode={state.mode.value} port1={state.sw_port1.value} port2={state.sw_port2.value}")
    print(f"downtime_s={downtime:.6g}")
    return EXIT_OK


COMMANDS = {
    "snr": cmd_snr,
    "reliability": cmd_reliability,
    "measure": cmd_measure,
    "enroll": cmd_enroll,
    "verify": cmd_verify,
    "plan": cmd_plan,
    "session": cmd_session,
}


def build_parser() -> argparse.ArgumentParser:
    def add_globals(p, suppress):
        default = argparse.SUPPRESS if suppress else None
        p.add_argument("--config", default=default, help="run configuration file")
        p.add_argument("--seed", type=int, default=default, help="master / noise seed")
        p.add_argument("--out", default=default, help="output path")

    parser = argparse.ArgumentParser(prog="fiberid", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    helps = {
        "snr": "SNR versus measure time table",
        "reliability": "WWI versus SNR and sweep span",
        "measure": "write a signature file for the configured pigtail",
        "enroll": "enroll the configured pigtail's noiseless signature",
        "verify": "verify a measurement against an enrolled label",
        "plan": "minimum SNR and measure time for a target WWI",
        "session": "run one identification session through the mode state machine",
    }
    subs = {}
    for name, text in helps.items():
        subs[name] = sub.add_parser(name, help=text)
        add_globals(subs[name], suppress=True)
    for name in ("measure", "enroll", "verify"):
        subs[name].add_argument("--pigtail-seed", type=int, default=None)
    subs["measure"].add_argument("--label", default="")
    subs["measure"].add_argument("--noiseless", action="store_true")
    subs["enroll"].add_argument("--label", required=True)
    subs["verify"].add_argument("--label", required=True)
    subs["verify"].add_argument("--signature", default=None, help="signature file to verify")
    subs["plan"].add_argument("--target", type=float, default=None, help="target log10 WWI")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, UsageError, UnknownLabelError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
