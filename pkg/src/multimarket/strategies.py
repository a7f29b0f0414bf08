"""Two-state automaton strategies over M markets: EV and NTPD.

Signal vectors are bitmasks over markets with bit ``m`` set when the signal in
market ``m`` is bad. Action vectors use the same packing with bit set = D.
Market set A occupies the low ``M_A`` bits and B the remaining ones.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import InvalidParameters, TransitionOutOfRange
from .stage_game import GameParams

R, P = 0, 1
STATE_NAMES = ("R", "P")
_PROB_TOL = 1e-12
_TABLE_CAP = 20


def _state(s) -> int:
    if isinstance(s, str):
        try:
            return STATE_NAMES.index(s)
        except ValueError:
            raise InvalidParameters(f"unknown state {s!r}") from None
    if s not in (R, P):
        raise InvalidParameters(f"unknown state {s!r}")
    return int(s)


def popcount(mask: int) -> int:
    return bin(mask).count("1")


@dataclass(frozen=True)
class MarketStructure:
    M: int
    M_A: int

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise InvalidParameters(f"need an integer M >= 1, got {self.M!r}")
        if int(self.M_A) != self.M_A or not 0 <= self.M_A <= self.M:
            raise InvalidParameters(f"need 0 <= M_A <= M, got M_A={self.M_A!r}, M={self.M}")

    @property
    def M_B(self) -> int:
        return self.M - self.M_A

    @property
    def mask_A(self) -> int:
        return (1 << self.M_A) - 1

    @property
    def mask_B(self) -> int:
        return ((1 << self.M) - 1) ^ self.mask_A

    @property
    def full(self) -> int:
        return (1 << self.M) - 1

    def require_ntpd(self):
        if not 1 <= self.M_A < self.M:
            raise InvalidParameters(f"NTPD needs 1 <= M_A < M, got M_A={self.M_A}, M={self.M}")

    def deviation_vector(self, d_A: int, d_B: int) -> int:
        """Action mask defecting in the first ``d_A`` markets of A and first ``d_B`` of B."""
        if not (0 <= d_A <= self.M_A and 0 <= d_B <= self.M_B):
            raise InvalidParameters(f"deviation ({d_A}, {d_B}) outside structure {self}")
        return ((1 << d_A) - 1) | (((1 << d_B) - 1) << self.M_A)


@dataclass(frozen=True, eq=False)
class TwoStateStrategy:
    """Automaton with states R (initial) and P.

    ``actions[state]`` is the prescribed action mask and ``transit_fn(state, signal_mask)``
    the probability of switching to the other state after observing ``signal_mask``.
    """

    structure: MarketStructure
    actions: tuple[int, int]
    transit_fn: Callable[[int, int], float] = field(repr=False)
    name: str = "two-state"
    initial_state: int = R

    @property
    def M(self) -> int:
        return self.structure.M

    def action_mask(self, state) -> int:
        return self.actions[_state(state)]

    def action_at(self, state) -> tuple[str, ...]:
        mask = self.action_mask(state)
        return tuple("D" if (mask >> m) & 1 else "C" for m in range(self.M))

    def transit(self, state, signal_mask: int) -> float:
        if not 0 <= signal_mask <= self.structure.full:
            raise InvalidParameters(f"signal mask {signal_mask} outside {self.M} markets")
        return self.transit_fn(_state(state), signal_mask)

    @cached_property
    def transit_table(self) -> np.ndarray:
        """Switch probabilities, shape ``(2, 2**M)``, indexed by state and signal mask."""
        if self.M > _TABLE_CAP:
            raise InvalidParameters(f"transition table for M={self.M} markets is too large")
        n = 1 << self.M
        table = np.array([[self.transit_fn(s, w) for w in range(n)] for s in (R, P)], dtype=float)
        table.setflags(write=False)
        return table


@dataclass(frozen=True, eq=False)
class ProductStrategy:
    """Independent copies of single-block automata, each block owning consecutive markets.

    Used for EV played market by market; the ``2**M``-state product machine is never built.
    """

    blocks: tuple[TwoStateStrategy, ...]
    name: str = "product"

    @property
    def M(self) -> int:
        return sum(b.M for b in self.blocks)

    @property
    def offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for b in self.blocks:
            out.append(acc)
            acc += b.M
        return tuple(out)

    def action_mask(self, states) -> int:
        mask = 0
        for b, off, s in zip(self.blocks, self.offsets, states):
            mask |= b.action_mask(s) << off
        return mask

    def next_state_distribution(self, states, signal_mask: int) -> dict[tuple[str, ...], float]:
        """Joint distribution of the next per-block states after ``signal_mask``."""
        if len(states) != len(self.blocks):
            raise InvalidParameters("one state per block required")
        dist = {(): 1.0}
        for b, off, s in zip(self.blocks, self.offsets, states):
            s = _state(s)
            w = (signal_mask >> off) & b.structure.full
            q = b.transit(s, w)
            nxt = {}
            for key, pr in dist.items():
                for target, pt in ((s, 1.0 - q), (1 - s, q)):
                    if pt == 0.0:
                        continue
                    k2 = key + (STATE_NAMES[target],)
                    nxt[k2] = nxt.get(k2, 0.0) + pr * pt
            dist = nxt
        return dist


def as_product(strategy) -> ProductStrategy:
    if isinstance(strategy, ProductStrategy):
        return strategy
    return ProductStrategy((strategy,), name=strategy.name)


# --- EV ------------------------------------------------------------------

@dataclass(frozen=True)
class EVParams:
    eps_R: float
    eps_P: float

    def __post_init__(self):
        for name in ("eps_R", "eps_P"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidParameters(f"{name} must lie in [0, 1], got {v!r}")


def make_ev(params: GameParams, ev: EVParams) -> TwoStateStrategy:
    """Single-market EV automaton: cooperate at R, defect at P."""
    eps_R, eps_P = ev.eps_R, ev.eps_P

    def transit(state, w):
        if state == R:
            return eps_R if w else 0.0
        return 0.0 if w else eps_P

    return TwoStateStrategy(MarketStructure(1, 1), (0, 1), transit, name="EV")


def make_ev_independent(params: GameParams, ev: EVParams, M: int) -> ProductStrategy:
    if int(M) != M or M < 1:
        raise InvalidParameters(f"need an integer M >= 1, got {M!r}")
    single = make_ev(params, ev)
    return ProductStrategy((single,) * M, name=f"EVx{M}")


# --- NTPD ----------------------------------------------------------------

@dataclass(frozen=True)
class NTPDParams:
    eps: float
    eps_hat: float

    def __post_init__(self):
        for name in ("eps", "eps_hat"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                raise InvalidParameters(f"{name} must lie in [0, 1], got {v!r}")


def ntpd_transition(structure: MarketStructure, np_: NTPDParams, state: int, all_flag: bool, k: int) -> float:
    """Switch probability of NTPD as a function of its sufficient statistics.

    At R, ``all_flag`` means every signal in A is bad and ``k`` counts bad signals in B.
    At P, ``all_flag`` means every signal in B is good and ``k`` counts bad signals in A.
    """
    eps, eh = np_.eps, np_.eps_hat
    M_A, M_B = structure.M_A, structure.M_B
    if state == R:
        return 1.0 - (M_B - k) * eh if all_flag else k * eh
    if all_flag:
        return eps + eh * ((1.0 - eps) * M_A - k)
    return (M_A - k) * eh


def _check_ntpd_ranges(structure: MarketStructure, np_: NTPDParams):
    branches = (
        ("R, all bad in A", R, True, range(structure.M_B + 1)),
        ("R, some good in A", R, False, range(structure.M_B + 1)),
        ("P, all good in B", P, True, range(structure.M_A + 1)),
        ("P, some bad in B", P, False, range(structure.M_A + 1)),
    )
    for label, state, flag, ks in branches:
        for k in ks:
            v = ntpd_transition(structure, np_, state, flag, k)
            if not (-_PROB_TOL <= v <= 1.0 + _PROB_TOL):
                raise TransitionOutOfRange(f"{label}, k={k}", v)


def make_ntpd(params: GameParams, structure: MarketStructure, np_: NTPDParams) -> TwoStateStrategy:
    """NTPD automaton: cooperate everywhere at R; at P cooperate on A and defect on B."""
    structure.require_ntpd()
    _check_ntpd_ranges(structure, np_)
    mA, mB = structure.mask_A, structure.mask_B

    def transit(state, w):
        if state == R:
            return ntpd_transition(structure, np_, R, (w & mA) == mA, popcount(w & mB))
        return ntpd_transition(structure, np_, P, (w & mB) == 0, popcount(w & mA))

    return TwoStateStrategy(structure, (0, mB), transit, name="NTPD")
