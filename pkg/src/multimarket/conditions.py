"""Equilibrium existence conditions for EV and NTPD, with signed slacks.

A slack is ``lhs - rhs`` of the displayed inequality, so a condition holds
iff its slack is nonnegative.
"""
from __future__ import annotations

from typing import NamedTuple

from .stage_game import GameParams
from .strategies import MarketStructure


class ConditionCheck(NamedTuple):
    holds: bool
    slack: float


class NTPDConditions(NamedTuple):
    first: ConditionCheck
    second: ConditionCheck

    @property
    def holds(self) -> bool:
        return self.first.holds and self.second.holds


def _check(slack: float) -> ConditionCheck:
    return ConditionCheck(bool(slack >= 0.0), float(slack))


def check_ev_condition(params: GameParams) -> ConditionCheck:
    x, y, p, d = params.x, params.y, params.p, params.delta
    mx = max(x, y)
    return _check(d * (2 * p - 1 - (1 - p) * (x + y) + mx) - mx)


def check_ntpd2_condition(params: GameParams) -> ConditionCheck:
    x, y, p, d = params.x, params.y, params.p, params.delta
    mx = max(x, y)
    return _check(d * (2 * p - 1 - (1 - p) * y + p * mx) - (x + mx))


def check_ntpdM_conditions(params: GameParams, structure: MarketStructure) -> NTPDConditions:
    structure.require_ntpd()
    x, y, p, d = params.x, params.y, params.p, params.delta
    s = params.s
    MA, MB = structure.M_A, structure.M_B
    sA, sB, pB = s**MA, s**MB, p**MB
    q = pB - sB
    inner = MB * (p - s) - x * (MA - MB) * p - sB * (p - s) * MB * y / q
    first = d * (x * (1 - sA) + s ** (MA - 1) * inner) - x * (1 + s ** (MA - 1) * MB)
    second = (
        d * (q * (MB * (p - s) + (MA - MB) * x * (s - sA)) + MB * y * (p - s) * (1 - sA - sB))
        - (MA * x * q + MB * y * (p - s))
    )
    return NTPDConditions(_check(first), _check(second))
