"""Stage game: prisoner's dilemma payoffs and the one-parameter signal model.

Actions and signals are encoded as small integers so that per-market vectors
can be packed into bitmasks: ``C = 0, D = 1`` and ``GOOD = 0, BAD = 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidParameters

C, D = 0, 1
GOOD, BAD = 0, 1

_ACTION_NAMES = {"C": C, "D": D}
_SIGNAL_NAMES = {"g": GOOD, "b": BAD}


def _action(a) -> int:
    if isinstance(a, str):
        if a not in _ACTION_NAMES:
            raise InvalidParameters(f"unknown action {a!r}")
        return _ACTION_NAMES[a]
    if a not in (C, D):
        raise InvalidParameters(f"unknown action {a!r}")
    return int(a)


def _signal(w) -> int:
    if isinstance(w, str):
        if w not in _SIGNAL_NAMES:
            raise InvalidParameters(f"unknown signal {w!r}")
        return _SIGNAL_NAMES[w]
    if w not in (GOOD, BAD):
        raise InvalidParameters(f"unknown signal {w!r}")
    return int(w)


@dataclass(frozen=True)
class GameParams:
    """Stage payoffs ``x``, ``y``, signal accuracy ``p`` and discount factor ``delta``.

    All invariants are checked on construction; boundary values are rejected.
    ``fractions.Fraction`` values are accepted and flow through the closed forms and
    condition checks exactly, which matters when ``delta`` must sit closer to 1 than
    a double can represent.
    """

    x: float
    y: float
    p: float
    delta: float

    def __post_init__(self):
        for name in ("x", "y", "p", "delta"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise InvalidParameters(f"{name} must be finite, got {v!r}")
        if not (self.x > 0 and self.y > 0):
            raise InvalidParameters(f"need x > 0 and y > 0, got x={self.x}, y={self.y}")
        if not (1 > self.x - self.y):
            raise InvalidParameters(f"need 1 > x - y, got x={self.x}, y={self.y}")
        if not (0.5 < self.p < 1):
            raise InvalidParameters(f"need 1/2 < p < 1, got p={self.p}")
        if not (0 < self.delta < 1):
            raise InvalidParameters(f"need 0 < delta < 1, got delta={self.delta}")

    @property
    def s(self) -> float:
        return 1 - self.p

    def replace(self, **changes) -> "GameParams":
        kw = dict(x=self.x, y=self.y, p=self.p, delta=self.delta)
        kw.update(changes)
        return GameParams(**kw)


class ActionPair(NamedTuple):
    a1: int
    a2: int

    @classmethod
    def of(cls, a1, a2) -> "ActionPair":
        return cls(_action(a1), _action(a2))


class SignalPair(NamedTuple):
    w1: int
    w2: int

    @classmethod
    def of(cls, w1, w2) -> "SignalPair":
        return cls(_signal(w1), _signal(w2))


def signal_marginal(params: GameParams, opponent_action, own_signal) -> float:
    """Probability that a player observes ``own_signal`` when the opponent plays ``opponent_action``.

    The right signal (good after C, bad after D) arrives with probability ``p``.
    """
    a, w = _action(opponent_action), _signal(own_signal)
    return params.p if a == w else params.s


def joint_signal_dist(params: GameParams, a) -> dict[SignalPair, float]:
    """Conditionally independent joint distribution of the signal pair.

    ``w1`` is player 1's signal about ``a2`` and ``w2`` is player 2's signal about ``a1``.
    """
    a = ActionPair.of(*a)
    out = {}
    for w1 in (GOOD, BAD):
        for w2 in (GOOD, BAD):
            out[SignalPair(w1, w2)] = signal_marginal(params, a.a2, w1) * signal_marginal(params, a.a1, w2)
    return out


def payoff_table(params: GameParams) -> np.ndarray:
    """Player 1's expected stage payoff indexed as ``table[a1, a2]``."""
    return np.array([[1.0, -params.y], [1.0 + params.x, 0.0]])


def expected_stage_payoff(params: GameParams, a, player: int = 1) -> float:
    a = ActionPair.of(*a)
    t = payoff_table(params)
    if player == 1:
        return float(t[a.a1, a.a2])
    if player == 2:
        return float(t[a.a2, a.a1])
    raise InvalidParameters(f"player must be 1 or 2, got {player!r}")


# --- vectorised helpers over M markets -------------------------------------

def market_payoff(params: GameParams, own_mask: int, opp_mask: int, M: int) -> float:
    """Sum over ``M`` markets of the stage payoff, with action vectors packed as bitmasks (bit set = D)."""
    t = payoff_table(params)
    total = 0.0
    for m in range(M):
        total += t[(own_mask >> m) & 1, (opp_mask >> m) & 1]
    return float(total)


def payoff_matrix(params: GameParams, M: int) -> np.ndarray:
    """``G[a_own, a_opp]`` summed over markets for all ``2**M`` action vectors of each player."""
    t = payoff_table(params)
    idx = np.arange(1 << M)
    bits = (idx[:, None] >> np.arange(M)) & 1
    return t[bits[:, None, :], bits[None, :, :]].sum(axis=2)


def signal_vector_probs(params: GameParams, opp_mask: int, M: int) -> np.ndarray:
    """Distribution over a player's ``2**M`` signal vectors (bit set = bad) given the opponent's action vector.

    Markets are independent, so this is a product of per-market marginals.
    """
    p, s = params.p, params.s
    probs = np.ones(1)
    # highest market first, so market m lands on bit m of the flat index
    for m in reversed(range(M)):
        row = (p, s) if (opp_mask >> m) & 1 == C else (s, p)
        probs = np.kron(probs, row)
    return probs


def signal_matrix(params: GameParams, M: int) -> np.ndarray:
    """``O[a, w]``: probability of signal vector ``w`` given the opponent's action vector ``a``."""
    k = np.array([[params.p, params.s], [params.s, params.p]])
    out = np.ones((1, 1))
    for _ in range(M):
        out = np.kron(out, k)
    return out
