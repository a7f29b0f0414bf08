"""Closed-form strategy parameters and payoffs, and the exact two-state value solve."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .conditions import check_ev_condition, check_ntpd2_condition, check_ntpdM_conditions
from .errors import ConditionViolated, InvalidParameters, SingularSystem
from .stage_game import GameParams, payoff_matrix, signal_vector_probs
from .strategies import EVParams, MarketStructure, NTPDParams, P, R, TwoStateStrategy

BELIEF_FREE_TOL = 1e-9


@dataclass(frozen=True)
class ValueMatrix:
    """``V_s1s2``: player 1 always plays the action of ``s1`` while player 2 starts at ``s2``."""

    V_RR: float
    V_RP: float
    V_PR: float
    V_PP: float

    @property
    def V_R(self) -> float:
        return self.V_RR

    @property
    def V_P(self) -> float:
        return self.V_RP

    @property
    def belief_free_gap(self) -> float:
        return max(abs(self.V_RR - self.V_PR), abs(self.V_RP - self.V_PP))

    def is_belief_free(self, tol: float = BELIEF_FREE_TOL) -> bool:
        return self.belief_free_gap <= tol

    def entry(self, s1, s2) -> float:
        names = {(R, R): "V_RR", (R, P): "V_RP", (P, R): "V_PR", (P, P): "V_PP"}
        key = tuple("RP".index(v) if isinstance(v, str) else v for v in (s1, s2))
        return getattr(self, names[key])


@dataclass(frozen=True)
class ClosedForms:
    kind: str
    V_R: float
    V_P: float
    eps: Optional[float] = None
    eps_hat: Optional[float] = None
    eps_R: Optional[float] = None
    eps_P: Optional[float] = None

    def ntpd_params(self) -> NTPDParams:
        if self.kind != "ntpd":
            raise InvalidParameters(f"closed forms are for {self.kind}, not NTPD")
        return NTPDParams(self.eps, self.eps_hat)

    def ev_params(self) -> EVParams:
        if self.kind != "ev":
            raise InvalidParameters(f"closed forms are for {self.kind}, not EV")
        return EVParams(self.eps_R, self.eps_P)


# --- EV --------------------------------------------------------------------

def ev_closed_payoff(params: GameParams) -> float:
    p = params.p
    return 1 - (1 - p) * params.x / (2 * p - 1)


def ev_closed_forms(params: GameParams, check: bool = True) -> ClosedForms:
    """EV transition probabilities from the two belief-free indifference identities.

    Requiring ``V_RR = V_PR`` and ``V_RP = V_PP`` in the single-market value equations gives
    ``(1 - delta) x = delta (p - s) eps_R (V_R - V_P)`` and the same with ``y`` and ``eps_P``,
    where ``V_R = 1 - s x / (p - s)`` and ``V_P = s y / (p - s)``.
    """
    cond = check_ev_condition(params)
    if check and not cond.holds:
        raise ConditionViolated("EV condition fails", {"ev": cond.slack})
    x, y, d = params.x, params.y, params.delta
    p, s = params.p, params.s
    V_R = 1.0 - s * x / (p - s)
    V_P = s * y / (p - s)
    gap = V_R - V_P
    eps_R = (1 - d) * x / (d * (p - s) * gap)
    eps_P = (1 - d) * y / (d * (p - s) * gap)
    return ClosedForms("ev", V_R, V_P, eps_R=eps_R, eps_P=eps_P)


def ev_transition_solve(params: GameParams) -> EVParams:
    return ev_closed_forms(params).ev_params()


# --- NTPD ------------------------------------------------------------------

def ntpd2_closed_forms(params: GameParams, check: bool = True) -> ClosedForms:
    """NTPD with two markets (``M_A = 1``)."""
    cond = check_ntpd2_condition(params)
    if check and not cond.holds:
        raise ConditionViolated("two-market NTPD condition fails", {"ntpd2": cond.slack})
    x, y, p, d = params.x, params.y, params.p, params.delta
    s = params.s
    V_P = 1 + (p * x + s * y) / (2 * p - 1)
    eps = (1 - d * p) * y / (d * (2 * p - 1 - s * y) - x)
    eps_hat = (1 - d * p) * x / (d * (2 * p - 1 - p * x - s * y))
    V_R = 2 - d * s * (2 * p - 1 - p * x - s * y) / ((2 * p - 1) * (1 - d * p))
    return ClosedForms("ntpd", V_R, V_P, eps=eps, eps_hat=eps_hat)


def ntpdM_closed_forms(params: GameParams, structure: MarketStructure, check: bool = True) -> ClosedForms:
    structure.require_ntpd()
    if check:
        conds = check_ntpdM_conditions(params, structure)
        if not conds.holds:
            raise ConditionViolated(
                "NTPD conditions fail",
                {"first": conds.first.slack, "second": conds.second.slack},
            )
    x, y, p, d = params.x, params.y, params.p, params.delta
    s = params.s
    M, MA, MB = structure.M, structure.M_A, structure.M_B
    sA, sB = s**MA, s**MB
    q = p**MB - sB
    assert q > 0, "p**M_B == s**M_B cannot happen for p > 1/2"
    punish = sB * MB * y / q
    V_P = MA + p * MA * x / (p - s) + punish
    eps_hat = x * (1 - d * (1 - sA)) / (
        d * (MB * (p - s) - x * (MA * p + MB * s - MB * sA) - (p - s) * punish)
    )
    eps = MB * y * (p - s) * eps_hat / ((1 - MA * eps_hat) * q * x)
    V_R = M - (d * sA * (p - s) * (M - V_P) + (1 - d) * (s - sA) * MB * x) / ((p - s) * (1 - d * (1 - sA)))
    return ClosedForms("ntpd", V_R, V_P, eps=eps, eps_hat=eps_hat)


def ntpd_limit_payoff(params: GameParams, structure: MarketStructure) -> float:
    """``V_R`` in the limit where the all-bad-in-A probability vanishes."""
    p = params.p
    return structure.M - structure.M_B * (1 - p) * params.x / (2 * p - 1)


# --- generic solve ---------------------------------------------------------

def switch_probabilities(params: GameParams, strategy: TwoStateStrategy, own_mask: int) -> tuple[float, float]:
    """Probability that the opponent leaves R and leaves P when this player plays ``own_mask``."""
    probs = signal_vector_probs(params, own_mask, strategy.M)
    table = strategy.transit_table
    return float(probs @ table[R]), float(probs @ table[P])


def _solve2(a11, a12, a21, a22, b1, b2):
    det = a11 * a22 - a12 * a21
    if det == 0.0 or not np.isfinite(det):
        raise SingularSystem("value equations are singular")
    return (b1 * a22 - a12 * b2) / det, (a11 * b2 - a21 * b1) / det


def solve_value_equations(params: GameParams, strategy: TwoStateStrategy) -> ValueMatrix:
    """Solve the four continuation values for a symmetric two-state strategy pair.

    For fixed own action ``a = f(s1)``, the pair ``(V_s1R, V_s1P)`` satisfies
    ``V_s1R = (1-d) g(a, f(R)) + d[(1 - t_R) V_s1R + t_R V_s1P]`` and the mirror
    equation at P, where ``t_R``/``t_P`` are the opponent's switch probabilities given ``a``.
    """
    d = params.delta
    G = payoff_matrix(params, strategy.M)
    fR, fP = strategy.actions
    out = {}
    for s1, a in ((R, fR), (P, fP)):
        tR, tP = switch_probabilities(params, strategy, a)
        vR, vP = _solve2(
            1 - d * (1 - tR), -d * tR,
            -d * tP, 1 - d * (1 - tP),
            (1 - d) * G[a, fR], (1 - d) * G[a, fP],
        )
        out[s1] = (vR, vP)
    return ValueMatrix(*(float(v) for v in (out[R][0], out[R][1], out[P][0], out[P][1])))


def indifference_residuals(params: GameParams, structure: MarketStructure, cf: ClosedForms,
                           vm: Optional[ValueMatrix] = None) -> dict[str, float]:
    """Residuals of ``(1-d) x = d eps_hat (p - s)(V_sR - V_sP)`` for both own states.

    With ``vm`` omitted the closed-form ``V_R - V_P`` is used for both.
    """
    d, x = params.delta, params.x
    k = d * cf.eps_hat * (params.p - params.s)
    gap_R = (vm.V_RR - vm.V_RP) if vm else cf.V_R - cf.V_P
    gap_P = (vm.V_PR - vm.V_PP) if vm else cf.V_R - cf.V_P
    return {"own_R": (1 - d) * x - k * gap_R, "own_P": (1 - d) * x - k * gap_P}
