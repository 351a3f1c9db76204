"""Command-line entry point: ``simulate``, ``sweep`` and ``plot``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .report import emit_plot, read_results, summarize, write_results, write_rows
from .simulation import (
    ScenarioConfig,
    SweepSpec,
    acquisition_symbol_count,
    aggregate_trials,
    run_acquisition,
    run_sweep,
)

log = logging.getLogger("irs_csi")


def _sigma_list(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty sigma_e list")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="irs-csi", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="scenario JSON file (defaults to the reference scenario)")
    common.add_argument("--trials", type=int, help="Monte Carlo trials per position")
    common.add_argument("--seed", type=int)
    common.add_argument("--sigma-e", type=_sigma_list, help="estimate quality, comma-separated for sweeps")
    common.add_argument("--out", type=Path, help="CSV output path (stdout if omitted)")

    sim = sub.add_parser("simulate", parents=[common], help="run acquisitions at one UE position")
    sim.add_argument("--ue", type=float, nargs=3, metavar=("X", "Y", "Z"))

    sw = sub.add_parser("sweep", parents=[common], help="move the UE along an axis")
    sw.add_argument("--axis", choices=("x", "y"))
    sw.add_argument("--from", dest="start", type=float)
    sw.add_argument("--to", dest="stop", type=float)
    sw.add_argument("--step", type=float)
    sw.add_argument("--workers", type=int, default=1, help="processes; 0 uses every CPU")
    sw.add_argument("--no-plot", action="store_true", help="skip the SVG figures next to --out")

    pl = sub.add_parser("plot", help="render figures from a results CSV")
    pl.add_argument("csv", type=Path)
    pl.add_argument("--metric", choices=("snr", "error", "both"), default="both")
    pl.add_argument("--out", type=Path, help="figure path (or stem when --metric both)")
    return parser


def _scenario(args) -> ScenarioConfig:
    config = load_config(args.config) if args.config else ScenarioConfig()
    changes = {}
    if args.trials is not None:
        changes["trials"] = args.trials
    if args.seed is not None:
        changes["seed"] = args.seed
    if getattr(args, "ue", None):
        changes["ue_position"] = type(config.ue_position)(*args.ue)
    if args.sigma_e is not None and args.command == "simulate":
        if len(args.sigma_e) != 1:
            raise ConfigError("simulate takes a single --sigma-e value")
        changes["sigma_e"] = args.sigma_e[0]
    try:
        return dataclasses.replace(config, **changes)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _figure_paths(stem: Path) -> dict[str, Path]:
    return {m: stem.with_name(f"{stem.stem}_{m}.svg") for m in ("snr", "error")}


def _emit(rows, out: Path | None) -> None:
    if out is None:
        write_rows(rows, sys.stdout)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        write_results(rows, out)
        log.info("wrote %s", out)


def cmd_simulate(args) -> int:
    config = _scenario(args)
    results = [run_acquisition(config, t) for t in range(config.trials)]
    _emit([aggregate_trials(results, config.sigma_e)], args.out)
    symbols = acquisition_symbol_count(
        (config.oversampling_v * config.rus_rows) * (config.oversampling_h * config.rus_cols),
        config.rus_count,
        config.shared_codeword,
    )
    print(f"acquisition budget: {symbols} OFDM symbols", file=sys.stderr)
    return 0


def cmd_sweep(args) -> int:
    config = _scenario(args)
    sw = config.sweep or SweepSpec(axis=args.axis or "x")
    try:
        sw = dataclasses.replace(
            sw,
            **{
                k: v
                for k, v in {
                    "axis": args.axis,
                    "start": args.start,
                    "stop": args.stop,
                    "step": args.step,
                    "sigma_e": args.sigma_e,
                }.items()
                if v is not None
            },
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    ue = config.ue_position._replace(**{sw.axis: sw.start})
    base = dataclasses.replace(config, ue_position=ue)
    rows = run_sweep(base, sw.axis, sw.start, sw.stop, sw.step, config.trials, sw.sigma_e, args.workers)
    _emit(rows, args.out)
    if args.out is not None and not args.no_plot:
        for metric, path in _figure_paths(args.out).items():
            emit_plot(rows, metric, path)
            log.info("wrote %s", path)
    for line in summarize(rows):
        print(line, file=sys.stderr)
    return 0


def cmd_plot(args) -> int:
    rows = read_results(args.csv)
    if args.metric == "both":
        for metric, path in _figure_paths(args.out or args.csv).items():
            emit_plot(rows, metric, path)
    else:
        emit_plot(rows, args.metric, args.out or args.csv.with_suffix(f".{args.metric}.svg"))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    handler = {"simulate": cmd_simulate, "sweep": cmd_sweep, "plot": cmd_plot}[args.command]
    try:
        return handler(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"irs-csi: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
