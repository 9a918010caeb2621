"""Command-line frontend: theory curves, simulation runs, power allocation,
floor sweeps and the validation suite, with machine-readable output."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time

import numpy as np

from . import __version__
from .analysis import (ModulationAnalysisParams, cdd_ber, cdd_error_floor,
                       optimize_power, power_sweep)
from .fading import ChannelParams, cascaded_alpha
from .harness import (CASE_DOPPLER, Scenario, StoppingRule, error_floor_sweep,
                      run_ber)

MOD_ORDERS = {"dbpsk": 2, "dqpsk": 4}


def _parse_snr_grid(text: str) -> list[float]:
    """start:step:stop (inclusive stop) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError("grid must be start:step:stop")
        start, step, stop = (float(p) for p in parts)
        if step <= 0:
            raise argparse.ArgumentTypeError("grid step must be positive")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 9) for i in range(max(n, 0))]
    return [float(p) for p in text.split(",") if p]


def _parse_pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected two comma-separated values")
    return float(parts[0]), float(parts[1])


def _parse_float_list(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p]


def _channel_from_args(args) -> ChannelParams:
    s1, s2 = args.sigma
    if args.case:
        f1, f2 = CASE_DOPPLER[args.case]
    else:
        f1 = f2 = 0.001
    if args.f1 is not None:
        f1 = args.f1
    if args.f2 is not None:
        f2 = args.f2
    return ChannelParams(sigma2_1=s1, sigma2_2=s2, f1=f1, f2=f2)


def _add_channel_flags(sp, with_rho=True):
    sp.add_argument("--mod", choices=sorted(MOD_ORDERS), default="dbpsk")
    sp.add_argument("--case", choices=["I", "II", "III"], default=None,
                    help="fading scenario preset (Doppler pair)")
    sp.add_argument("--f1", type=float, default=None, help="override SR Doppler")
    sp.add_argument("--f2", type=float, default=None, help="override RD Doppler")
    sp.add_argument("--sigma", type=_parse_pair, default=(1.0, 1.0),
                    metavar="S1,S2", help="channel variances, e.g. 1,1")
    if with_rho:
        sp.add_argument("--rho", type=float, default=0.3,
                        help="power-allocation factor (source share of P)")


def _write_output(args, text: str, manifest: dict) -> None:
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
        with open(f"{args.out}.manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")
    else:
        sys.stdout.write(text)


def _manifest(args, argv) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items())
           if k != "func" and not callable(v)}
    return {
        "command": ["diffrelay"] + list(argv),
        "config": cfg,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x: float) -> str:
    return format(float(x), ".10g")


def cmd_theory(args, argv) -> int:
    ch = _channel_from_args(args)
    p = ModulationAnalysisParams.for_order(MOD_ORDERS[args.mod])
    from .link import LinkConfig
    rows = []
    for snr in args.snr:
        cfg = LinkConfig.from_snr_db(snr, args.rho, ch.sigma2_1, M=p.M)
        rows.append([_fmt(snr), _fmt(cdd_ber(cfg, ch, p, lag=args.lag)), "theory"])
    floor = cdd_error_floor(cascaded_alpha(ch, args.lag), p)
    rows.append(["inf", _fmt(floor), "floor"])
    _write_output(args, _csv_text(["snr_db", "ber_theory", "source"], rows),
                  _manifest(args, argv))
    return 0


def cmd_simulate(args, argv) -> int:
    ch = _channel_from_args(args)
    M = MOD_ORDERS[args.mod]
    sc = Scenario(name="cli", ch=ch, rho=args.rho, M=M,
                  fading_case=None, detector=args.detector,
                  msd_window=args.window if args.detector == "msd" else None)
    stop = StoppingRule(min_errors=args.min_errors, min_bits=args.min_bits,
                        max_bits=args.max_bits)
    points = run_ber(sc, args.snr, stop=stop, seed=args.seed,
                     workers=args.workers, frame_len=args.frame_len)
    rows = [[_fmt(pt.snr_db), _fmt(pt.ber), pt.errors, pt.trials,
             _fmt(pt.ci_low), _fmt(pt.ci_high)] for pt in points]
    _write_output(args, _csv_text(
        ["snr_db", "ber_sim", "errors", "trials", "ci_low", "ci_high"], rows),
        _manifest(args, argv))
    return 0


def cmd_poweralloc(args, argv) -> int:
    ch = _channel_from_args(args)
    p = ModulationAnalysisParams.for_order(MOD_ORDERS[args.mod])
    grid, bers = power_sweep(args.snr_db, ch, p)
    result = {
        "rho_grid": [float(r) for r in grid],
        "ber_curve": [float(b) for b in bers],
        "rho_opt": optimize_power(args.snr_db, ch, p),
    }
    _write_output(args, json.dumps(result, indent=2) + "\n", _manifest(args, argv))
    return 0


def cmd_floorsweep(args, argv) -> int:
    M = MOD_ORDERS[args.mod]
    stop = StoppingRule(min_errors=args.min_errors, min_bits=args.min_bits,
                        max_bits=args.max_bits)
    sweep = error_floor_sweep(args.f_grid, args.mode, M, seed=args.seed,
                              snr_db=args.snr_db, rho=args.rho, stop=stop,
                              workers=args.workers)
    rows = [[_fmt(fp.f), fp.mode, _fmt(fp.floor_theory), _fmt(fp.point.ber),
             fp.point.errors, fp.point.trials, _fmt(fp.point.ci_low),
             _fmt(fp.point.ci_high)] for fp in sweep]
    _write_output(args, _csv_text(
        ["f", "mode", "floor_theory", "ber_sim", "errors", "trials",
         "ci_low", "ci_high"], rows), _manifest(args, argv))
    return 0


def cmd_validate(args, argv) -> int:
    from . import validate
    numbers = [int(n) for n in args.criteria.split(",")] if args.criteria else None
    results = validate.run_all(numbers=numbers, workers=args.workers,
                               stream=sys.stdout)
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="diffrelay",
        description="Differential dual-hop AF relaying: theory and simulation. "
                    "All --snr values are total network power over noise, P/N0, in dB.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("theory", help="closed-form CDD BER curve plus error floor")
    _add_channel_flags(sp)
    sp.add_argument("--snr", type=_parse_snr_grid, required=True,
                    metavar="START:STEP:STOP")
    sp.add_argument("--lag", type=int, default=1)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_theory)

    sp = sub.add_parser("simulate", help="Monte Carlo BER curve")
    _add_channel_flags(sp)
    sp.add_argument("--snr", type=_parse_snr_grid, required=True,
                    metavar="START:STEP:STOP")
    sp.add_argument("--detector", choices=["cdd", "msd", "coherent"], default="cdd")
    sp.add_argument("--window", type=int, default=10, help="MSD window length")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--frame-len", type=int, default=1000)
    sp.add_argument("--min-errors", type=int, default=100)
    sp.add_argument("--min-bits", type=int, default=100_000)
    sp.add_argument("--max-bits", type=int, default=100_000_000)
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("poweralloc", help="optimal source/relay power split")
    _add_channel_flags(sp, with_rho=False)
    sp.add_argument("--snr-db", type=float, default=35.0)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_poweralloc)

    sp = sub.add_parser("floorsweep", help="error floor vs fading rate")
    sp.add_argument("--mod", choices=sorted(MOD_ORDERS), default="dbpsk")
    sp.add_argument("--mode", choices=["both", "f1-only"], default="both")
    sp.add_argument("--f-grid", type=_parse_float_list,
                    default=[0.001, 0.002, 0.005, 0.01, 0.02], metavar="F1,F2,...")
    sp.add_argument("--rho", type=float, default=0.3)
    sp.add_argument("--snr-db", type=float, default=60.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--min-errors", type=int, default=100)
    sp.add_argument("--min-bits", type=int, default=100_000)
    sp.add_argument("--max-bits", type=int, default=100_000_000)
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_floorsweep)

    sp = sub.add_parser("validate", help="run the acceptance-criteria suite")
    sp.add_argument("--criteria", default=None, metavar="1,2,...",
                    help="subset to run (default: all)")
    sp.add_argument("--workers", type=int, default=None)
    sp.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, argv)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    raise SystemExit(main())
