"""Efficiency of NTPD against the LP upper bound for M = 2, 4, 6 at delta = 0.8."""
import argparse
import time
from pathlib import Path

from multimarket.sweep import SweepSpec, run_figure4, summarize_figure4


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--markets", default="2,4,6")
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    markets = tuple(int(m) for m in args.markets.split(","))
    spec = SweepSpec(mode="efficiency", deltas=(0.8,), markets=markets, jobs=args.jobs,
                     out=str(out / "figure4.csv"), plot=str(out / "figure4.svg"))
    t0 = time.perf_counter()
    rows, _ = run_figure4(spec)
    for (M, delta), s in sorted(summarize_figure4(rows).items()):
        print(f"M={M}: p in [{s['p_min']:.2f}, {s['p_max']:.2f}], "
              f"efficiency {s['eff_min']:.4f} .. {s['eff_max']:.4f} (at top {s['eff_at_top']:.4f})")
    print(f"{len(rows)} points in {time.perf_counter() - t0:.1f}s; wrote {out / 'figure4.csv'}")


if __name__ == "__main__":
    main()
