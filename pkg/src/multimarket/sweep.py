"""Parameter sweeps behind the figures, certification reports and CSV/SVG output."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Sequence

from .conditions import check_ev_condition, check_ntpdM_conditions
from .equilibrium import certify_ntpd
from .errors import DimensionCapExceeded, InvalidParameters, NotAnEquilibrium
from .lp_bound import DEFAULT_CAP, efficiency
from .simulator import SimConfig, simulate
from .stage_game import GameParams
from .strategies import MarketStructure, make_ev, make_ntpd
from .value_solver import ev_closed_forms, ev_closed_payoff, ntpdM_closed_forms, ntpd2_closed_forms, solve_value_equations

MODES = ("payoffs", "conditions", "efficiency", "montecarlo", "certify")

FIGURE3_COLUMNS = ["p", "delta", "strategy", "per_market_payoff", "is_equilibrium",
                   "eps", "eps_hat", "cond1_slack", "cond2_slack"]
FIGURE4_COLUMNS = ["p", "delta", "M", "M_A", "ntpd_payoff", "lp_upper_bound", "efficiency", "is_equilibrium"]
MONTECARLO_COLUMNS = ["p", "delta", "strategy", "start_state", "analytic", "mc_mean", "mc_std_error", "z_score"]


@dataclass
class SweepSpec:
    p_start: float = 0.51
    p_stop: float = 0.99
    p_step: float = 0.01
    deltas: tuple = (0.7, 0.8, 0.9)
    x: float = 0.1
    y: float = 0.1
    markets: tuple = (6,)
    ma: Optional[int] = None
    mode: str = "payoffs"
    seed: int = 0
    replications: int = 100_000
    tail_tol: float = 1e-4
    cap: int = DEFAULT_CAP
    jobs: int = 1
    out: Optional[str] = None
    plot: Optional[str] = None

    def __post_init__(self):
        self.deltas = tuple(float(d) for d in _as_tuple(self.deltas))
        self.markets = tuple(int(m) for m in _as_tuple(self.markets))
        if not self.p_step > 0:
            raise InvalidParameters(f"p_step must be positive, got {self.p_step}")
        if self.mode not in MODES:
            raise InvalidParameters(f"mode must be one of {MODES}, got {self.mode!r}")
        for p in self.p_grid():
            for d in self.deltas:
                GameParams(self.x, self.y, p, d)
        for M in self.markets:
            self.structure(M)

    def p_grid(self) -> list[float]:
        """Grid points from ``p_start`` to ``p_stop`` inclusive; empty when ``p_stop < p_start``."""
        if self.p_stop < self.p_start:
            return []
        n = int(math.floor((self.p_stop - self.p_start) / self.p_step + 1e-9)) + 1
        return [round(self.p_start + k * self.p_step, 10) for k in range(n)]

    def structure(self, M: int) -> MarketStructure:
        M_A = self.ma if self.ma is not None else M // 2
        st = MarketStructure(M, M_A)
        st.require_ntpd()
        return st

    def points(self):
        """Grid points ordered by (delta, p)."""
        for d in self.deltas:
            for p in self.p_grid():
                yield GameParams(self.x, self.y, p, d)


def _as_tuple(v):
    if isinstance(v, str):
        return tuple(s for s in v.replace(",", " ").split())
    if isinstance(v, (int, float)):
        return (v,)
    return tuple(v)


_FIELD_TYPES = {"p_start": float, "p_stop": float, "p_step": float, "x": float, "y": float,
                "ma": int, "seed": int, "replications": int, "tail_tol": float, "cap": int,
                "jobs": int, "mode": str, "out": str, "plot": str, "deltas": str, "markets": str}
_ALIASES = {"delta": "deltas", "m": "markets", "M": "markets", "M_A": "ma", "m_a": "ma"}


def read_config(path) -> dict:
    """Parse a ``key = value`` spec file (``#`` starts a comment) into SweepSpec keyword arguments."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameters(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = _ALIASES.get(key, key).replace("-", "_")
        if key not in _FIELD_TYPES:
            raise InvalidParameters(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = _FIELD_TYPES[key](value)
        except ValueError:
            raise InvalidParameters(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return out


# --- formatting -------------------------------------------------------------

def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return ""
        return f"{v:.12g}"
    return str(v)


def write_csv(rows: Sequence[dict], columns: Sequence[str], comment: str, path=None) -> str:
    buf = io.StringIO()
    buf.write(f"# {comment}\r\n")
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row.get(c)) for c in columns])
    text = buf.getvalue()
    if path is not None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, newline="")
    return text


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


# --- figure 3 ---------------------------------------------------------------

def figure3_rows(spec: SweepSpec) -> list[dict]:
    M = spec.markets[0]
    structure = spec.structure(M)
    rows = []
    for g in spec.points():
        ev_cond = check_ev_condition(g)
        ev = {"p": g.p, "delta": g.delta, "strategy": "EV", "is_equilibrium": ev_cond.holds,
              "cond1_slack": ev_cond.slack}
        if ev_cond.holds:
            ev["per_market_payoff"] = ev_closed_payoff(g)
        conds = check_ntpdM_conditions(g, structure)
        nt = {"p": g.p, "delta": g.delta, "strategy": "NTPD", "is_equilibrium": conds.holds,
              "cond1_slack": conds.first.slack, "cond2_slack": conds.second.slack}
        if conds.holds:
            cf = ntpdM_closed_forms(g, structure)
            nt.update(per_market_payoff=cf.V_R / M, eps=cf.eps, eps_hat=cf.eps_hat)
        rows += [ev, nt]
    return rows


def summarize_figure3(rows: Sequence[dict]) -> dict:
    """Equilibrium ranges per (strategy, delta) and NTPD's relative gain over EV per delta."""
    ranges, gains = {}, {}
    by_key = {}
    for r in rows:
        by_key[(r["strategy"], float(r["delta"]), float(r["p"]))] = r
    for (strategy, d, p), r in by_key.items():
        if _truthy(r["is_equilibrium"]):
            lo, hi = ranges.get((strategy, d), (p, p))
            ranges[(strategy, d)] = (min(lo, p), max(hi, p))
        if strategy == "NTPD" and _truthy(r["is_equilibrium"]):
            ev = by_key.get(("EV", d, p))
            if ev is not None and _truthy(ev["is_equilibrium"]):
                gain = float(r["per_market_payoff"]) / float(ev["per_market_payoff"]) - 1
                gains.setdefault(d, []).append((p, gain))
    gain_summary = {
        d: {"max": max(g for _, g in v), "min": min(g for _, g in v), "points": len(v)}
        for d, v in gains.items()
    }
    return {"ranges": ranges, "gains": gain_summary, "gain_points": gains}


def _truthy(v) -> bool:
    return v is True or v == "true"


def run_figure3(spec: SweepSpec):
    rows = figure3_rows(spec)
    M = spec.markets[0]
    st = spec.structure(M)
    comment = (f"figure3 x={fmt(spec.x)} y={fmt(spec.y)} M={M} M_A={st.M_A} "
               f"p_start={fmt(spec.p_start)} p_stop={fmt(spec.p_stop)} p_step={fmt(spec.p_step)}; "
               f"per_market_payoff/eps/eps_hat only at equilibrium points; "
               f"EV rows: cond1_slack is the EV condition")
    text = write_csv(rows, FIGURE3_COLUMNS, comment, spec.out)
    if spec.plot:
        from .plotting import plot_figure3
        plot_figure3(rows, spec.plot)
    return rows, text


# --- figure 4 ---------------------------------------------------------------

def _figure4_point(args):
    g, structure, cap = args
    row = {"p": g.p, "delta": g.delta, "M": structure.M, "M_A": structure.M_A, "is_equilibrium": False}
    try:
        eff, bound = efficiency(g, structure, cap=cap)
    except NotAnEquilibrium:
        return row
    cf = (ntpd2_closed_forms(g) if structure.M == 2 else ntpdM_closed_forms(g, structure))
    row.update(ntpd_payoff=cf.V_R, lp_upper_bound=bound.v_star, efficiency=eff, is_equilibrium=True)
    return row


def figure4_rows(spec: SweepSpec) -> list[dict]:
    for M in spec.markets:
        if M > spec.cap:
            raise DimensionCapExceeded(f"M={M} exceeds the LP dimension cap {spec.cap}")
    tasks = [(g, spec.structure(M), spec.cap) for g in spec.points() for M in spec.markets]
    if spec.jobs > 1:
        with ProcessPoolExecutor(spec.jobs) as pool:
            return list(pool.map(_figure4_point, tasks))
    return [_figure4_point(t) for t in tasks]


def summarize_figure4(rows: Sequence[dict]) -> dict:
    out = {}
    for r in rows:
        if not _truthy(r["is_equilibrium"]):
            continue
        key = (int(r["M"]), float(r["delta"]))
        e, p = float(r["efficiency"]), float(r["p"])
        cur = out.setdefault(key, {"p_min": p, "p_max": p, "eff_min": e, "eff_max": e, "eff_at_top": e, "curve": []})
        cur["curve"].append((p, e))
        cur["eff_min"], cur["eff_max"] = min(cur["eff_min"], e), max(cur["eff_max"], e)
        if p >= cur["p_max"]:
            cur["p_max"], cur["eff_at_top"] = p, e
        cur["p_min"] = min(cur["p_min"], p)
    return out


def run_figure4(spec: SweepSpec):
    rows = figure4_rows(spec)
    comment = (f"figure4 x={fmt(spec.x)} y={fmt(spec.y)} p_start={fmt(spec.p_start)} p_stop={fmt(spec.p_stop)} "
               f"p_step={fmt(spec.p_step)} bisection_tol=1e-06; ntpd_payoff and lp_upper_bound are totals "
               f"over M markets; metrics only at certified points")
    text = write_csv(rows, FIGURE4_COLUMNS, comment, spec.out)
    if spec.plot:
        from .plotting import plot_figure4
        plot_figure4(rows, spec.plot)
    return rows, text


# --- certify / simulate -----------------------------------------------------

def run_certify(spec: SweepSpec):
    reports = []
    for M in spec.markets:
        st = spec.structure(M)
        for g in spec.points():
            reports.append(certify_ntpd(g, st).to_dict())
    text = json.dumps(reports, indent=2, sort_keys=True) + "\n"
    if spec.out:
        Path(spec.out).parent.mkdir(parents=True, exist_ok=True)
        Path(spec.out).write_text(text)
    return reports, text


def montecarlo_rows(spec: SweepSpec) -> list[dict]:
    """Monte Carlo estimates of every value-matrix entry for EV and (where constructible) NTPD."""
    rows = []
    for M in spec.markets:
        st = spec.structure(M)
        for g in spec.points():
            candidates = []
            try:
                candidates.append(("EV", make_ev(g, ev_closed_forms(g, check=False).ev_params())))
            except InvalidParameters:
                pass
            try:
                cf = ntpd2_closed_forms(g, check=False) if M == 2 else ntpdM_closed_forms(g, st, check=False)
                candidates.append((f"NTPD{M}", make_ntpd(g, st, cf.ntpd_params())))
            except (InvalidParameters, ZeroDivisionError):
                pass
            for name, strat in candidates:
                vm = solve_value_equations(g, strat)
                for start in ("RR", "RP", "PR", "PP"):
                    cfg = SimConfig(replications=spec.replications, seed=spec.seed, start_states=tuple(start),
                                    tail_tol=spec.tail_tol, player1_mode="fixed")
                    res = simulate(g, strat, cfg)
                    analytic = vm.entry(*start)
                    se = float(res.std_error[0])
                    mean = float(res.mean_payoff[0])
                    rows.append({"p": g.p, "delta": g.delta, "strategy": name, "start_state": start,
                                 "analytic": analytic, "mc_mean": mean, "mc_std_error": se,
                                 "z_score": (mean - analytic) / se if se > 0 else None})
    return rows


def run_simulate(spec: SweepSpec):
    rows = montecarlo_rows(spec)
    comment = (f"montecarlo x={fmt(spec.x)} y={fmt(spec.y)} seed={spec.seed} replications={spec.replications} "
               f"tail_tol={fmt(spec.tail_tol)} p_step={fmt(spec.p_step)}; player 1 holds its start state")
    text = write_csv(rows, MONTECARLO_COLUMNS, comment, spec.out)
    return rows, text
