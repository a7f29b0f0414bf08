"""Two-market NTPD versus EV payoffs over the p grid, at delta in {0.7, 0.8, 0.9}."""
import argparse
from pathlib import Path

from multimarket.sweep import SweepSpec, run_figure3, summarize_figure3


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    rows, _ = run_figure3(SweepSpec(out=str(out / "figure3.csv"), plot=str(out / "figure3.svg")))
    summary = summarize_figure3(rows)
    for (strategy, delta), (lo, hi) in sorted(summary["ranges"].items()):
        print(f"{strategy:5s} delta={delta}: equilibrium for p in [{lo:.2f}, {hi:.2f}]")
    for delta, g in sorted(summary["gains"].items()):
        print(f"delta={delta}: NTPD gain over EV ranges {100 * g['min']:.3f}% .. {100 * g['max']:.3f}%")
    print(f"wrote {out / 'figure3.csv'} and {out / 'figure3.svg'}")


if __name__ == "__main__":
    main()
