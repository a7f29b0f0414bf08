"""Acceptance criteria, each reported as a single PASS/FAIL line.

Run under pytest, or directly with ``python tests/test_acceptance.py``.
"""
import sys
import time
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

from multimarket import (
    GameParams, MarketStructure, certify_ntpd, check_ntpd2_condition, check_ntpdM_conditions, feasible_at,
    make_ntpd, ntpd2_closed_forms, ntpdM_closed_forms, solve_value_equations,
)
from multimarket.equilibrium import action_payoffs, check_ntpd_implies_ev, deviation_payoff, two_market_deviations
from multimarket.strategies import P, R, popcount
from multimarket.sweep import (
    FIGURE3_COLUMNS, MONTECARLO_COLUMNS, SweepSpec, figure3_rows, figure4_rows, montecarlo_rows, run_figure3, run_figure4,
    summarize_figure3, summarize_figure4, write_csv,
)

GOLDEN = Path(__file__).parent / "golden"
TOL = 1e-9


def report(n, ok, detail):
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} | {detail}"
    print(line, flush=True)
    return line


def random_points(rng, count, accept, M_choices=None):
    pts = []
    while len(pts) < count:
        x, y = rng.uniform(0.01, 1.0, 2)
        if not 1 > x - y:
            continue
        p = rng.uniform(0.51, 0.995)
        d = 1 - 10 ** -rng.uniform(0.05, 4)
        g = GameParams(float(x), float(y), float(p), float(d))
        if M_choices is None:
            structure = MarketStructure(2, 1)
        else:
            M = int(rng.choice(M_choices))
            structure = MarketStructure(M, int(rng.integers(1, M)))
        if accept(g, structure):
            pts.append((g, structure))
    return pts


@lru_cache(maxsize=None)
def grid_points():
    rng = np.random.default_rng(20240101)
    two = random_points(rng, 1000, lambda g, s: check_ntpd2_condition(g).holds)
    many = random_points(rng, 1000, lambda g, s: check_ntpdM_conditions(g, s).holds, M_choices=range(2, 9))
    return two, many


# 1 --------------------------------------------------------------------------------------

def criterion_1():
    t0 = time.perf_counter()
    two, many = grid_points()
    worst2 = worstM = 0.0
    for g, structure in two:
        cf = ntpd2_closed_forms(g)
        vm = solve_value_equations(g, make_ntpd(g, structure, cf.ntpd_params()))
        worst2 = max(worst2, abs(vm.V_R - cf.V_R), abs(vm.V_P - cf.V_P))
    for g, structure in many:
        cf = ntpdM_closed_forms(g, structure)
        vm = solve_value_equations(g, make_ntpd(g, structure, cf.ntpd_params()))
        worstM = max(worstM, abs(vm.V_R - cf.V_R), abs(vm.V_P - cf.V_P))
    elapsed = time.perf_counter() - t0
    ok = worst2 <= TOL and worstM <= TOL and elapsed < 10
    return ok, f"max |solve - closed form|: M=2 {worst2:.2e}, M<=8 {worstM:.2e}; {elapsed:.1f}s"


# 2 --------------------------------------------------------------------------------------

def criterion_2():
    two, many = grid_points()
    bf = binding = 0.0
    slack = np.inf
    for g, structure in two:
        cf = ntpd2_closed_forms(g)
        vm = solve_value_equations(g, make_ntpd(g, structure, cf.ntpd_params()))
        bf = max(bf, vm.belief_free_gap)
        dv = two_market_deviations(g, cf)
        binding = max(binding, abs(cf.V_P - dv["DC_P"]), abs(cf.V_P - dv["DD_P"]))
        slack = min(slack, cf.V_R - dv["DC_R"], cf.V_R - dv["DD_R"])
    for g, structure in many:
        cf = ntpdM_closed_forms(g, structure)
        vm = solve_value_equations(g, make_ntpd(g, structure, cf.ntpd_params()))
        bf = max(bf, vm.belief_free_gap)
    ok = bf <= TOL and binding <= TOL and slack >= -TOL
    return ok, f"belief-free gap {bf:.2e}; P-state binding {binding:.2e}; min R-state margin {slack:.3g}"


# 3 --------------------------------------------------------------------------------------

def certified_point(structure):
    for d in (0.9, 0.95, 0.99, 0.999):
        for p in np.arange(0.60, 0.99, 0.01):
            g = GameParams(0.1, 0.1, round(float(p), 2), d)
            if check_ntpdM_conditions(g, structure).holds:
                return g
    return None


def deviation_structure(g, structure, shape):
    cf = ntpdM_closed_forms(g, structure)
    MA, MB = structure.M_A, structure.M_B
    VR = np.array([[deviation_payoff(g, structure, cf, (a, b, R)) for b in range(MB + 1)] for a in range(MA + 1)])
    VP = np.array([[deviation_payoff(g, structure, cf, (a, b, P)) for b in range(MB + 1)] for a in range(MA + 1)])
    problems = []
    if np.ptp(VR, axis=1).max() > TOL:
        problems.append("R not flat in d_B")
    if np.any(np.diff(VR[:, 0]) > TOL):
        problems.append("R increasing in d_A")
    if np.ptp(VP, axis=0).max() > TOL:
        problems.append("P not flat in d_A")
    if MB >= 2 and np.any(np.diff(VP[0], 2) > TOL):
        problems.append("P not concave in d_B")
    if MB >= 2 and np.all(np.diff(VP[0], 2) >= -TOL):
        shape["convex"] += 1
    if np.any(VP[0] > VP[0, 0] + TOL):
        problems.append("P deviation beats the endpoints")
    if abs(VP[0, 0] - VP[0, MB]) > TOL:
        problems.append("P ends differ")
    strat = make_ntpd(g, structure, cf.ntpd_params())
    brute = action_payoffs(g, strat, cf.V_R, cf.V_P)
    mismatch = 0.0
    for a in range(1 << structure.M):
        dA, dB = popcount(a & structure.mask_A), popcount(a & structure.mask_B)
        mismatch = max(mismatch, abs(brute[R, a] - VR[dA, dB]), abs(brute[P, a] - VP[dA, dB]))
    if mismatch > TOL:
        problems.append(f"brute force off by {mismatch:.2e}")
    return problems, mismatch


def criterion_3():
    t0 = time.perf_counter()
    checked, problems, worst = 0, [], 0.0
    shape = {"convex": 0}
    for M in range(2, 11):
        for M_A in sorted({1, M // 2, M - 1}):
            structure = MarketStructure(M, M_A)
            g = certified_point(structure)
            if g is None:
                continue
            if not certify_ntpd(g, structure).certified:
                problems.append(f"M={M},M_A={M_A} not certified")
                continue
            found, mismatch = deviation_structure(g, structure, shape)
            worst = max(worst, mismatch)
            problems += [f"M={M},M_A={M_A}: {p}" for p in found]
            checked += 1
    elapsed = time.perf_counter() - t0
    ok = not problems and checked >= 15 and elapsed < 60
    concave_failures = sum("concave" in p for p in problems)
    detail = (f"{checked} certified structures up to M=10, brute-force mismatch {worst:.2e}; "
              f"V(0,d_B,P) convex in {shape['convex']} of them and never above its endpoints; "
              f"{concave_failures} concavity violations; {elapsed:.1f}s")
    return ok, detail + ("; " + "; ".join(problems[:3]) if problems else "")


# 4 --------------------------------------------------------------------------------------

FIG3_NTPD = {0.7: (0.64, 0.83), 0.8: (0.60, 0.88), 0.9: (0.58, 0.92)}


def criterion_4():
    t0 = time.perf_counter()
    rows = figure3_rows(SweepSpec())
    summary = summarize_figure3(rows)
    elapsed = time.perf_counter() - t0
    step = 0.01 + 1e-9
    problems = []
    for d in FIG3_NTPD:
        lo, hi = summary["ranges"][("EV", d)]
        if abs(lo - 0.56) > step or abs(hi - 0.99) > step:
            problems.append(f"EV range at {d}: [{lo}, {hi}]")
        lo, hi = summary["ranges"][("NTPD", d)]
        if abs(lo - FIG3_NTPD[d][0]) > step or abs(hi - FIG3_NTPD[d][1]) > step:
            problems.append(f"NTPD range at {d}: [{lo}, {hi}]")
    gains = summary["gain_points"][0.7]
    common = len(gains)
    if any(gain <= 0 for _, gain in gains):
        problems.append("NTPD not above EV everywhere at delta=0.7")
    g = summary["gains"][0.7]
    if abs(100 * g["max"] - 4.75) > 0.3 or abs(100 * g["min"] - 0.87) > 0.3:
        problems.append(f"gains {100 * g['max']:.3f}% / {100 * g['min']:.3f}%")
    if elapsed >= 5:
        problems.append(f"took {elapsed:.1f}s")
    ranges = ", ".join(f"{d}: [{a:g}, {b:g}]" for (s, d), (a, b) in sorted(summary["ranges"].items()) if s == "NTPD")
    ev = ", ".join(f"{d}: [{a:g}, {b:g}]" for (s, d), (a, b) in sorted(summary["ranges"].items()) if s == "EV")
    detail = (f"NTPD {ranges}; EV {ev}; delta=0.7 gain max {100 * g['max']:.3f}% min {100 * g['min']:.3f}% "
              f"over {common} points; {elapsed:.2f}s")
    return not problems, detail + ("; " + "; ".join(problems) if problems else "")


# 5 / 8 ----------------------------------------------------------------------------------

@lru_cache(maxsize=None)
def figure4():
    t0 = time.perf_counter()
    rows = figure4_rows(SweepSpec(mode="efficiency", deltas=(0.8,), markets=(2, 4, 6)))
    return rows, time.perf_counter() - t0


def criterion_5():
    rows, elapsed = figure4()
    s = summarize_figure4(rows)
    six, two, four = s[(6, 0.8)], s[(2, 0.8)], s[(4, 0.8)]
    top = [e for p, e in six["curve"] if p >= six["p_max"] - 0.02 + 1e-9]
    problems = []
    if abs(six["p_max"] - 0.88) > 0.01 + 1e-9:
        problems.append(f"M=6 range ends at {six['p_max']}")
    if six["eff_min"] < 0.90:
        problems.append(f"M=6 efficiency dips to {six['eff_min']:.4f}")
    if max(top) < 0.98:
        problems.append(f"M=6 tops out at {max(top):.4f}")
    if abs(two["eff_max"] - 0.99) > 0.02 or abs(four["eff_max"] - 0.98) > 0.02:
        problems.append(f"M=2/M=4 maxima {two['eff_max']:.4f}/{four['eff_max']:.4f}")
    if elapsed > 1800:
        problems.append(f"took {elapsed:.0f}s")
    detail = (f"M=6 range [{six['p_min']:g}, {six['p_max']:g}], efficiency {six['eff_min']:.4f}..{six['eff_max']:.4f}; "
              f"M=2 max {two['eff_max']:.4f}; M=4 max {four['eff_max']:.4f}; {elapsed:.1f}s")
    return not problems, detail + ("; " + "; ".join(problems) if problems else "")


def criterion_8():
    rows, _ = figure4()
    worst, failures, n = np.inf, 0, 0
    for r in rows:
        if not r["is_equilibrium"]:
            continue
        n += 1
        g = GameParams(0.1, 0.1, r["p"], r["delta"])
        structure = MarketStructure(r["M"], r["M_A"])
        cf = ntpd2_closed_forms(g) if r["M"] == 2 else ntpdM_closed_forms(g, structure)
        if not feasible_at(cf.V_R, cf.V_P, g, structure):
            failures += 1
        worst = min(worst, r["lp_upper_bound"] - cf.V_R)
    ok = failures == 0 and worst >= -1e-5
    return ok, f"{n} certified points; witness infeasible at {failures}; min v_star - V_R = {worst:.3g}"


# 6 --------------------------------------------------------------------------------------

def criterion_6():
    rng = np.random.default_rng(6)
    pts = []
    while len(pts) < 10_000:
        x, y = rng.uniform(0.001, 2.0, 2)
        if 1 > x - y:
            pts.append(GameParams(float(x), float(y), float(rng.uniform(0.501, 0.999)), float(rng.uniform(0.001, 0.999))))
    res = check_ntpd_implies_ev(pts)
    return res.holds, f"{len(pts)} points, {res.checked} with the NTPD condition, counterexample: {res.counterexample}"


# 7 / 9 ----------------------------------------------------------------------------------

MC_SPEC = dict(mode="montecarlo", p_start=0.735, p_stop=0.9, p_step=0.165, deltas=(0.7,), markets=(6,),
               replications=100_000, seed=2024, tail_tol=1e-4)


def montecarlo_csv():
    t0 = time.perf_counter()
    spec = SweepSpec(**MC_SPEC)
    rows = montecarlo_rows(spec)
    return rows, write_csv(rows, MONTECARLO_COLUMNS, "montecarlo acceptance"), time.perf_counter() - t0


@lru_cache(maxsize=None)
def montecarlo_first():
    return montecarlo_csv()


def criterion_7():
    rows, _, elapsed = montecarlo_first()
    named = {("NTPD6", 0.735): "NTPD range midpoint", ("EV", 0.9): "EV-only", ("NTPD6", 0.9): "non-equilibrium"}
    worst = {}
    for r in rows:
        key = (r["strategy"], r["p"])
        if key in named:
            worst[key] = max(worst.get(key, 0.0), abs(r["z_score"]))
    ok = len(worst) == 3 and all(z <= 4 for z in worst.values()) and elapsed / 3 < 120
    parts = ", ".join(f"{named[k]} max |z| {z:.2f}" for k, z in worst.items())
    return ok, f"{parts}; N=1e5, four start pairs each; {elapsed:.1f}s total"


def criterion_9():
    problems = []
    f3a = write_csv(figure3_rows(SweepSpec()), FIGURE3_COLUMNS, "figure3")
    f3b = write_csv(figure3_rows(SweepSpec()), FIGURE3_COLUMNS, "figure3")
    if f3a != f3b:
        problems.append("figure 3 differs between runs")
    _, text3 = run_figure3(SweepSpec())
    if text3.encode() != (GOLDEN / "figure3.csv").read_bytes():
        problems.append("figure 3 differs from golden")
    _, text4 = run_figure4(SweepSpec(mode="efficiency", deltas=(0.8,), markets=(2, 4, 6)))
    if text4.encode() != (GOLDEN / "figure4.csv").read_bytes():
        problems.append("figure 4 differs from golden")
    _, first, _ = montecarlo_first()
    _, second, _ = montecarlo_csv()
    if first != second:
        problems.append("Monte Carlo CSV differs between runs")
    if problems:
        return False, "; ".join(problems)
    return True, "figure 3, figure 4 (against golden files) and Monte Carlo CSVs byte-identical across reruns"


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
            6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9}


# With equal endpoints, concavity would put interior deviations at or above the
# equilibrium value; the computed curve is convex, which is what the bound needs.
KNOWN_FAILURES = {3: "V(0, d_B, P) is convex in d_B, not concave"}


@pytest.mark.parametrize("n", [
    pytest.param(n, marks=pytest.mark.xfail(reason=KNOWN_FAILURES[n], strict=True)) if n in KNOWN_FAILURES else n
    for n in sorted(CRITERIA)
])
def test_criterion(n, record_property):
    ok, detail = CRITERIA[n]()
    record_property("criterion", (n, report(n, ok, detail)))
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for n, fn in CRITERIA.items():
        ok, detail = fn()
        report(n, ok, detail)
        failed += not ok
    sys.exit(1 if failed else 0)


def test_criterion_3_holds_apart_from_curvature_direction():
    shape = {"convex": 0}
    checked = 0
    for M in range(2, 11):
        for M_A in sorted({1, M // 2, M - 1}):
            structure = MarketStructure(M, M_A)
            g = certified_point(structure)
            if g is None:
                continue
            problems, _ = deviation_structure(g, structure, shape)
            assert [p for p in problems if "concave" not in p] == [], (M, M_A)
            checked += 1
    assert checked >= 15
    assert shape["convex"] == sum(1 for M in range(2, 11) for M_A in sorted({1, M // 2, M - 1})
                                  if M - M_A >= 2 and certified_point(MarketStructure(M, M_A)) is not None)
