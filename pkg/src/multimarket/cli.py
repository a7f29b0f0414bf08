"""Command-line front end: ``multimarket {figure3,figure4,certify,simulate,bound}``."""
from __future__ import annotations

import argparse
import sys

from .errors import DimensionCapExceeded, InvalidParameters
from .sweep import (SweepSpec, read_config, run_certify, run_figure3, run_figure4, run_simulate,
                    summarize_figure3, summarize_figure4)

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_CAP = 0, 1, 2, 3

_DEFAULTS = {
    "figure3": {"mode": "payoffs"},
    "figure4": {"mode": "efficiency", "deltas": (0.8,), "markets": (2, 4, 6)},
    "certify": {"mode": "certify", "deltas": (0.7,), "markets": (6,), "p_start": 0.75, "p_stop": 0.75},
    "simulate": {"mode": "montecarlo", "deltas": (0.7,), "markets": (6,), "p_start": 0.735, "p_stop": 0.735},
    "bound": {"mode": "efficiency", "deltas": (0.8,), "markets": (6,), "p_start": 0.75, "p_stop": 0.75},
}

_FLAGS = {"p_start": "--p-start", "p_stop": "--p-stop", "p_step": "--p-step", "deltas": "--delta",
          "x": "--x", "y": "--y", "markets": "--markets", "ma": "--ma", "seed": "--seed", "out": "--out",
          "replications": "--replications", "plot": "--plot", "jobs": "--jobs", "cap": "--cap"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multimarket", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _DEFAULTS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="key = value file; command-line flags override it")
        sp.add_argument("--p-start", type=float)
        sp.add_argument("--p-stop", type=float)
        sp.add_argument("--p-step", type=float)
        sp.add_argument("--delta", help="discount factor(s), comma separated")
        sp.add_argument("--x", type=float)
        sp.add_argument("--y", type=float)
        sp.add_argument("--markets", help="number(s) of markets, comma separated")
        sp.add_argument("--ma", type=int, help="markets in set A (default M // 2)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--replications", type=int)
        sp.add_argument("--jobs", type=int)
        sp.add_argument("--cap", type=int, help="largest M the LP bound will attempt")
        sp.add_argument("--out", help="output file (stdout when omitted)")
        sp.add_argument("--plot", help="SVG plot path (figure3/figure4)")
    return parser


def spec_from_args(args) -> SweepSpec:
    kwargs = dict(_DEFAULTS[args.command])
    if args.config:
        kwargs.update(read_config(args.config))
    for field, flag in _FLAGS.items():
        value = getattr(args, flag.lstrip("-").replace("-", "_"))
        if value is not None:
            kwargs[field] = value
    kwargs["mode"] = _DEFAULTS[args.command]["mode"]
    try:
        return SweepSpec(**kwargs)
    except (TypeError, ValueError) as exc:
        raise InvalidParameters(str(exc)) from exc


def _report(command, rows):
    if command == "figure3":
        summary = summarize_figure3(rows)
        for (strategy, d), (lo, hi) in sorted(summary["ranges"].items()):
            print(f"{strategy} delta={d:g}: equilibrium for p in [{lo:g}, {hi:g}]", file=sys.stderr)
        for d, g in sorted(summary["gains"].items()):
            print(f"delta={d:g}: NTPD gain over EV max {100 * g['max']:.3f}% min {100 * g['min']:.3f}%",
                  file=sys.stderr)
    elif command in ("figure4", "bound"):
        for (M, d), s in sorted(summarize_figure4(rows).items()):
            print(f"M={M} delta={d:g}: p in [{s['p_min']:g}, {s['p_max']:g}], efficiency "
                  f"{s['eff_min']:.4f}..{s['eff_max']:.4f}, {s['eff_at_top']:.4f} at top", file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = spec_from_args(args)
        runner = {"figure3": run_figure3, "figure4": run_figure4, "bound": run_figure4,
                  "certify": run_certify, "simulate": run_simulate}[args.command]
        rows, text = runner(spec)
    except DimensionCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except InvalidParameters as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    if spec.out is None:
        sys.stdout.write(text)
    _report(args.command, rows)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
