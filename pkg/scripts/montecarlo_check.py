"""Compare simulated discounted payoffs with the value matrix at a few parameter points.

Every start pair is simulated with player 1 held in its start state, so each
estimate targets one value-matrix entry. Reports the largest |z| per strategy.
"""
import argparse

from multimarket.sweep import SweepSpec, montecarlo_rows, write_csv, MONTECARLO_COLUMNS


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", default="0.735,0.9")
    ap.add_argument("--delta", type=float, default=0.7)
    ap.add_argument("--markets", type=int, default=6)
    ap.add_argument("--replications", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--out")
    args = ap.parse_args()

    rows = []
    for p in (float(v) for v in args.p.split(",")):
        spec = SweepSpec(mode="montecarlo", p_start=p, p_stop=p, deltas=(args.delta,), markets=(args.markets,),
                         replications=args.replications, seed=args.seed)
        rows += montecarlo_rows(spec)
    for r in rows:
        print(f"p={r['p']:<6g} {r['strategy']:6s} {r['start_state']}  analytic {r['analytic']:9.5f}  "
              f"simulated {r['mc_mean']:9.5f} +- {r['mc_std_error']:.5f}  z={r['z_score']:+.2f}")
    if args.out:
        write_csv(rows, MONTECARLO_COLUMNS, f"montecarlo seed={args.seed}", args.out)
    worst = max(abs(r["z_score"]) for r in rows)
    print(f"largest |z| = {worst:.2f}")
    return 0 if worst <= 4 else 1


if __name__ == "__main__":
    raise SystemExit(main())
