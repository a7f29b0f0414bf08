"""Deviation payoffs and belief-free equilibrium certification for EV and NTPD.

Certification follows the one-shot-deviation argument: given the belief-free
identities, a player is optimal iff no single-period deviation followed by
conformity beats the prescribed action against either opponent state.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional

import numpy as np

from .conditions import (
    ConditionCheck,
    check_ev_condition,
    check_ntpd2_condition,
    check_ntpdM_conditions,
)
from .errors import ConditionViolated, InvalidParameters
from .stage_game import GameParams, payoff_matrix, signal_matrix
from .strategies import (
    STATE_NAMES,
    MarketStructure,
    P,
    R,
    TwoStateStrategy,
    _state,
    make_ev,
    make_ntpd,
    popcount,
)
from .value_solver import (
    BELIEF_FREE_TOL,
    ClosedForms,
    ValueMatrix,
    ev_closed_forms,
    ev_closed_payoff,
    ntpd2_closed_forms,
    ntpdM_closed_forms,
    ntpd_limit_payoff,
    solve_value_equations,
)

__all__ = [
    "ConditionCheck", "check_ev_condition", "check_ntpd2_condition", "check_ntpdM_conditions",
    "DeviationClass", "EquilibriumReport", "deviation_payoff", "two_market_deviations",
    "action_payoffs", "certify_ntpd", "certify_ev", "check_ntpd_implies_ev", "check_large_market_advantage",
    "lowest_delta_probe",
]

MARGIN_TOL = 1e-9
BRUTE_FORCE_CAP = 10
CERTIFICATE_NOTE = (
    "one-shot deviations against both opponent states, given belief-free continuation values; "
    "optimality against arbitrary (including infinite-state) opponent strategies is not re-verified"
)


class DeviationClass(NamedTuple):
    d_A: int
    d_B: int
    opponent_state: int

    def label(self) -> str:
        return f"({self.d_A},{self.d_B},{STATE_NAMES[self.opponent_state]})"


def deviation_payoff(params: GameParams, structure: MarketStructure, cf: ClosedForms, dev) -> float:
    """Payoff of defecting in ``d_A`` markets of A and ``d_B`` of B for one period, then conforming."""
    d_A, d_B, state = dev
    state = _state(state)
    MA, MB = structure.M_A, structure.M_B
    if not (0 <= d_A <= MA and 0 <= d_B <= MB):
        raise InvalidParameters(f"deviation ({d_A}, {d_B}) outside structure {structure}")
    x, y, p, d = params.x, params.y, params.p, params.delta
    s = params.s
    eh, eps = cf.eps_hat, cf.eps
    VR, VP = cf.V_R, cf.V_P
    if state == R:
        stage = structure.M + d_A * x + d_B * x
        leave = ((MB - d_B) * s + d_B * p) * eh + p**d_A * s ** (MA - d_A) * (1 - MB * eh)
        return (1 - d) * stage + d * VR - d * (VR - VP) * leave
    stage = MA + d_A * x - (MB - d_B) * y
    back = ((MA - d_A) * p + d_A * s) * eh + s**d_B * p ** (MB - d_B) * eps * (1 - MA * eh)
    return (1 - d) * stage + d * VP + d * (VR - VP) * back


def two_market_deviations(params: GameParams, cf: ClosedForms) -> dict[str, float]:
    """Deviation payoffs for ``M = 2, M_A = 1``: D in market A only (``DC``) or in both (``DD``)."""
    x, y, p, d = params.x, params.y, params.p, params.delta
    eh, e = cf.eps_hat, cf.eps
    VR, VP = cf.V_R, cf.V_P
    mix = e + eh - e * eh
    pe = p * (e - eh - e * eh)
    return {
        "DC_R": (1 - d) * (2 + x) + d * ((1 - p + (2 * p - 1) * eh) * VR + (p - (2 * p - 1) * eh) * VP),
        "DD_R": (1 - d) * (2 + 2 * x) + d * ((1 - p) * VR + p * VP),
        "DC_P": (1 - d) * (1 + x - y) + d * ((eh + pe) * VR + (1 - eh - pe) * VP),
        "DD_P": (1 - d) * (1 + x) + d * (mix * (1 - p) * VR + (1 - mix * (1 - p)) * VP),
    }


def action_payoffs(params: GameParams, strategy: TwoStateStrategy, V_R: float, V_P: float) -> np.ndarray:
    """Brute-force one-shot payoffs, shape ``(2, 2**M)``, of every own action vector vs each opponent state.

    Continuation is ``V_R`` or ``V_P`` according to the opponent's next state, with
    the expectation taken over all ``2**M`` opponent signal vectors.
    """
    d = params.delta
    G = payoff_matrix(params, strategy.M)
    O = signal_matrix(params, strategy.M)
    leave = O @ strategy.transit_table.T
    fR, fP = strategy.actions
    out = np.empty((2, 1 << strategy.M))
    out[R] = (1 - d) * G[:, fR] + d * ((1 - leave[:, R]) * V_R + leave[:, R] * V_P)
    out[P] = (1 - d) * G[:, fP] + d * ((1 - leave[:, P]) * V_P + leave[:, P] * V_R)
    return out


@dataclass
class EquilibriumReport:
    strategy: str
    params: GameParams
    structure: MarketStructure
    conditions: dict[str, ConditionCheck]
    closed_forms: Optional[ClosedForms]
    value_matrix: Optional[ValueMatrix]
    deviation_margins: dict[DeviationClass, float] = field(default_factory=dict)
    brute_force_mismatch: Optional[float] = None
    belief_free: bool = False
    certified: bool = False
    error: Optional[str] = None
    note: str = CERTIFICATE_NOTE

    @property
    def min_margin(self) -> float:
        return min(self.deviation_margins.values()) if self.deviation_margins else float("nan")

    def to_dict(self) -> dict:
        cf = self.closed_forms
        vm = self.value_matrix
        return {
            "strategy": self.strategy,
            "params": {"x": self.params.x, "y": self.params.y, "p": self.params.p, "delta": self.params.delta},
            "structure": {"M": self.structure.M, "M_A": self.structure.M_A, "M_B": self.structure.M_B},
            "conditions": {k: {"holds": c.holds, "slack": c.slack} for k, c in self.conditions.items()},
            "closed_forms": None if cf is None else {
                k: v for k, v in vars(cf).items() if v is not None
            },
            "value_matrix": None if vm is None else vars(vm).copy(),
            "deviation_margins": {dev.label(): m for dev, m in self.deviation_margins.items()},
            "brute_force_mismatch": self.brute_force_mismatch,
            "belief_free": self.belief_free,
            "certified": self.certified,
            "error": self.error,
            "note": self.note,
        }


def _ntpd_conditions(params, structure) -> dict[str, ConditionCheck]:
    if structure.M == 2:
        return {"ntpd2": check_ntpd2_condition(params)}
    c = check_ntpdM_conditions(params, structure)
    return {"first": c.first, "second": c.second}


def certify_ntpd(params: GameParams, structure: MarketStructure, brute_force: Optional[bool] = None) -> EquilibriumReport:
    """Check every ingredient of NTPD being a belief-free equilibrium at ``params``.

    Closed forms are evaluated even when a condition fails, so the report shows
    which deviations become profitable; ``certified`` requires everything to hold.
    """
    structure.require_ntpd()
    conds = _ntpd_conditions(params, structure)
    report = EquilibriumReport("NTPD", params, structure, conds, None, None)
    try:
        if structure.M == 2:
            cf = ntpd2_closed_forms(params, check=False)
        else:
            cf = ntpdM_closed_forms(params, structure, check=False)
        report.closed_forms = cf
        strategy = make_ntpd(params, structure, cf.ntpd_params())
    except (InvalidParameters, ZeroDivisionError) as exc:
        report.error = str(exc)
        return report

    if brute_force is None:
        brute_force = structure.M <= BRUTE_FORCE_CAP
    vm = solve_value_equations(params, strategy)
    report.value_matrix = vm
    report.belief_free = bool(
        vm.is_belief_free()
        and abs(vm.V_RR - cf.V_R) <= BELIEF_FREE_TOL
        and abs(vm.V_RP - cf.V_P) <= BELIEF_FREE_TOL
    )
    for state, V in ((R, cf.V_R), (P, cf.V_P)):
        for d_A in range(structure.M_A + 1):
            for d_B in range(structure.M_B + 1):
                dev = DeviationClass(d_A, d_B, state)
                report.deviation_margins[dev] = V - deviation_payoff(params, structure, cf, dev)

    if brute_force:
        brute = action_payoffs(params, strategy, cf.V_R, cf.V_P)
        worst = 0.0
        for a in range(1 << structure.M):
            dA = popcount(a & structure.mask_A)
            dB = popcount(a & structure.mask_B)
            for state in (R, P):
                cls = deviation_payoff(params, structure, cf, (dA, dB, state))
                worst = max(worst, abs(brute[state, a] - cls))
        report.brute_force_mismatch = worst

    report.certified = bool(
        all(c.holds for c in conds.values())
        and report.belief_free
        and report.min_margin >= -MARGIN_TOL
        and (report.brute_force_mismatch is None or report.brute_force_mismatch <= BELIEF_FREE_TOL)
    )
    return report


def certify_ev(params: GameParams) -> EquilibriumReport:
    structure = MarketStructure(1, 1)
    cond = check_ev_condition(params)
    report = EquilibriumReport("EV", params, structure, {"ev": cond}, None, None)
    cf = ev_closed_forms(params, check=False)
    report.closed_forms = cf
    try:
        strategy = make_ev(params, cf.ev_params())
    except InvalidParameters as exc:
        report.error = str(exc)
        return report
    vm = solve_value_equations(params, strategy)
    report.value_matrix = vm
    report.belief_free = bool(vm.is_belief_free() and abs(vm.V_RR - cf.V_R) <= BELIEF_FREE_TOL)
    brute = action_payoffs(params, strategy, cf.V_R, cf.V_P)
    for state, V in ((R, cf.V_R), (P, cf.V_P)):
        for a in (0, 1):
            report.deviation_margins[DeviationClass(a, 0, state)] = V - brute[state, a]
    report.certified = bool(cond.holds and report.belief_free and report.min_margin >= -MARGIN_TOL)
    return report


# --- corollaries -----------------------------------------------------------

class ImplicationResult(NamedTuple):
    holds: bool
    checked: int
    counterexample: Optional[GameParams]


def check_ntpd_implies_ev(points: Iterable[GameParams]) -> ImplicationResult:
    """With two markets, NTPD being an equilibrium implies EV is one and pays at least as much."""
    checked = 0
    for g in points:
        if not check_ntpd2_condition(g).holds:
            continue
        checked += 1
        ntpd = ntpd2_closed_forms(g)
        if not check_ev_condition(g).holds or 2 * ev_closed_payoff(g) < ntpd.V_R:
            return ImplicationResult(False, checked, g)
    return ImplicationResult(True, checked, None)


class LargeMarketResult(NamedTuple):
    applicable: bool
    holds: Optional[bool]
    side_slack: float
    ntpd_per_market: Optional[float]
    ev_payoff: float
    limit_per_market: float


def large_market_side_slack(params: GameParams, structure: MarketStructure) -> float:
    x, y, p = params.x, params.y, params.p
    return structure.M_A * p * x - (structure.M_B - 1) * (2 * p - 1 - (1 - p) * x) - (1 - p) * y


def check_large_market_advantage(params: GameParams, structure: MarketStructure, large_tol: float = 1e-6) -> LargeMarketResult:
    """Large-market comparison of NTPD against EV played market by market.

    Not applicable unless both ``s**M_A`` and ``s**M_B`` are at most ``large_tol`` and
    the side condition and both NTPD conditions hold at ``params``.
    With many markets the conditions need ``1 - delta`` of order ``s**(M_A - 1)``;
    pass ``Fraction`` parameters to evaluate them exactly.
    """
    structure.require_ntpd()
    side = large_market_side_slack(params, structure)
    ev = float(ev_closed_payoff(params))
    limit = float(ntpd_limit_payoff(params, structure) / structure.M)
    s = params.s
    large = max(s**structure.M_A, s**structure.M_B) <= large_tol
    if not large or side < 0 or not check_ntpdM_conditions(params, structure).holds:
        return LargeMarketResult(False, None, float(side), None, ev, limit)
    per_market = ntpdM_closed_forms(params, structure).V_R / structure.M
    holds = check_ev_condition(params).holds and per_market > ev_closed_payoff(params)
    return LargeMarketResult(True, bool(holds), float(side), float(per_market), ev, limit)


class LowestDeltaProbe(NamedTuple):
    delta_min: float
    ntpd_per_market: float
    ev_payoff: float

    @property
    def gap(self) -> float:
        return self.ntpd_per_market - self.ev_payoff


def lowest_delta_probe(x: float, y: float, p: float) -> LowestDeltaProbe:
    """Two-market NTPD payoff at the smallest discount factor meeting its condition.

    Raises ``ConditionViolated`` when no ``delta < 1`` works.
    """
    s = 1 - p
    mx = max(x, y)
    coef = 2 * p - 1 - s * y + p * mx
    if coef <= 0 or (x + mx) / coef >= 1:
        raise ConditionViolated("no discount factor in (0, 1) satisfies the two-market condition")
    delta_min = (x + mx) / coef
    g = GameParams(x, y, p, delta_min)
    cf = ntpd2_closed_forms(g, check=False)
    return LowestDeltaProbe(delta_min, cf.V_R / 2, ev_closed_payoff(g))
