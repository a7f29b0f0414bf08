"""Large-market comparison of NTPD with market-by-market EV, in exact arithmetic.

With tens of markets in each set the NTPD conditions only hold when 1 - delta is
of order s**(M_A - 1), far below double precision, so every input is a Fraction.
"""
import argparse
from fractions import Fraction

from multimarket import GameParams, MarketStructure
from multimarket.equilibrium import check_large_market_advantage


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--x", default="79/100")
    ap.add_argument("--y", default="1/100")
    ap.add_argument("--p", default="9/10")
    ap.add_argument("--ma", type=int, default=40)
    ap.add_argument("--mb", type=int, default=40)
    args = ap.parse_args()

    p = Fraction(args.p)
    structure = MarketStructure(args.ma + args.mb, args.ma)
    delta = 1 - (1 - p) ** args.ma
    res = check_large_market_advantage(GameParams(Fraction(args.x), Fraction(args.y), p, delta), structure)
    print(f"M_A={args.ma} M_B={args.mb} p={p} delta=1-s^{args.ma}")
    print(f"applicable={res.applicable} holds={res.holds} side slack={res.side_slack:.4f}")
    if res.applicable:
        print(f"NTPD per market {res.ntpd_per_market:.6f}, EV {res.ev_payoff:.6f}, "
              f"many-market limit {res.limit_per_market:.6f}")


if __name__ == "__main__":
    main()
