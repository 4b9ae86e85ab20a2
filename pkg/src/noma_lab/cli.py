"""Command-line driver: ``noma-lab sweep|validate|plot|preset``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, ExperimentConfig, load_config, load_preset, preset_names
from .montecarlo import default_workers
from .plot import PLOT_KINDS, PlotError, emit_plot
from .sweep import VALIDATION_COLUMNS, format_csv, read_csv, run_sweep, run_validate

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_VALIDATION = 3


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 unsigned bits, got {text}")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _add_source(p: argparse.ArgumentParser, required: bool = True) -> None:
    src = p.add_mutually_exclusive_group(required=required)
    src.add_argument("--config", type=Path, help="experiment config file")
    src.add_argument("--preset", help="named preset (see 'preset list')")
    p.add_argument("--seed", type=_u64, help="override the config seed")
    p.add_argument("--samples", type=_positive, help="override the Monte Carlo sample count")
    p.add_argument("--workers", type=_positive, default=None,
                   help="worker threads (default: $NOMA_LAB_WORKERS or 1); never changes results")
    p.add_argument("--out", type=Path, help="output file (default: stdout for CSV)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noma-lab",
        description="Cooperative D2D-NOMA simulation and analysis experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run a parameter sweep")
    _add_source(p)
    p.add_argument("--format", choices=("csv", "svg"), default="csv")

    p = sub.add_parser("validate", help="compare Monte Carlo against analytic forms")
    _add_source(p)

    p = sub.add_parser("plot", help="render a sweep as SVG")
    _add_source(p, required=False)
    p.add_argument("--table", type=Path, help="plot an existing sweep CSV instead of running one")
    p.add_argument("--kind", choices=PLOT_KINDS, help="plot kind (default: from config, else lines)")
    p.add_argument("--x-axis", help="column for the horizontal axis of a line plot")
    p.add_argument("--format", choices=("svg",), default="svg")

    p = sub.add_parser("preset", help="inspect bundled presets")
    psub = p.add_subparsers(dest="preset_command", required=True)
    psub.add_parser("list", help="list preset names")
    show = psub.add_parser("show", help="print a preset's config text")
    show.add_argument("name")
    return parser


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else load_preset(args.preset)
    return cfg.with_mc(samples=args.samples, seed=args.seed)


def _workers(args) -> int:
    return args.workers if args.workers is not None else default_workers()


def _emit_text(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _require_out(args) -> Path:
    if args.out is None:
        raise ConfigError("--out is required for SVG output")
    return args.out


def _cmd_sweep(args) -> int:
    cfg = _load(args)
    out = _require_out(args) if args.format == "svg" else args.out
    rows = run_sweep(cfg, workers=_workers(args))
    if args.format == "svg":
        emit_plot(rows, cfg.plot, out, x_axis=cfg.x_axis, title=cfg.title or None)
    else:
        _emit_text(format_csv(rows), out)
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg = _load(args)
    report = run_validate(cfg, workers=_workers(args))
    _emit_text(format_csv(report.rows, VALIDATION_COLUMNS), args.out)
    print(report.summary(), file=sys.stderr)
    for row in report.failures:
        print(f"FAIL {row['scheme']} {row['metric']} {row['variant']} rho_db={row['rho_db']:g} "
              f"gap={row.get('abs_gap')} tol={row.get('tolerance')} {row.get('error') or ''}",
              file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_VALIDATION


def _cmd_plot(args) -> int:
    out = _require_out(args)
    if args.table is not None:
        if args.config or args.preset:
            raise ConfigError("--table cannot be combined with --config or --preset")
        rows = read_csv(args.table.read_text())
        kind, x_axis, title = args.kind or "lines", args.x_axis or "rho_db", None
    else:
        if not (args.config or args.preset):
            raise ConfigError("plot needs --table, --config or --preset")
        cfg = _load(args)
        rows = run_sweep(cfg, workers=_workers(args))
        kind, x_axis, title = args.kind or cfg.plot, args.x_axis or cfg.x_axis, cfg.title or None
    emit_plot(rows, kind, out, x_axis=x_axis, title=title)
    return EXIT_OK


def _cmd_preset(args) -> int:
    if args.preset_command == "list":
        for name in preset_names():
            print(name)
    else:
        sys.stdout.write(load_preset(args.name).echo())
    return EXIT_OK


_COMMANDS = {"sweep": _cmd_sweep, "validate": _cmd_validate,
             "plot": _cmd_plot, "preset": _cmd_preset}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PlotError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
