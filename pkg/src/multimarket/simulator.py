"""Monte Carlo estimates of discounted average payoffs between automaton players.

Replications are simulated in fixed-size chunks, vectorised over the chunk.
Chunk ``c`` draws from its own stream ``SeedSequence(seed, spawn_key=(c,))``
and always draws a full chunk, so the randomness seen by replication ``r``
depends only on ``(seed, r)`` and the horizon, never on the replication count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidParameters, TruncationError
from .stage_game import GameParams, payoff_table, signal_vector_probs
from .strategies import STATE_NAMES, P, R, ProductStrategy, TwoStateStrategy, _state, as_product

CHUNK = 4096
JOINT_STATES = ("RR", "RP", "PR", "PP")


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    ``horizon=None`` picks the shortest horizon meeting ``tail_tol``. With
    ``player1_mode="fixed"`` player 1 never leaves its start state, which is
    the play behind the value-matrix entries ``V_s1s2``.
    """

    horizon: Optional[int] = None
    replications: int = 10_000
    seed: int = 0
    start_states: tuple = (R, R)
    tail_tol: float = 1e-4
    player1_mode: str = "automaton"

    def __post_init__(self):
        if self.horizon is not None and (int(self.horizon) != self.horizon or self.horizon < 1):
            raise InvalidParameters(f"horizon must be a positive integer, got {self.horizon!r}")
        if int(self.replications) != self.replications or self.replications < 1:
            raise InvalidParameters(f"replications must be a positive integer, got {self.replications!r}")
        if self.tail_tol <= 0:
            raise InvalidParameters("tail_tol must be positive")
        if self.player1_mode not in ("automaton", "fixed"):
            raise InvalidParameters(f"unknown player1_mode {self.player1_mode!r}")
        object.__setattr__(self, "start_states", tuple(_state(s) for s in self.start_states))
        if len(self.start_states) != 2:
            raise InvalidParameters("start_states must be a pair")


@dataclass
class SimResult:
    mean_payoff: np.ndarray
    std_error: np.ndarray
    state_occupancy: dict[str, float]
    next_state_freq: dict[str, float]
    horizon: int
    replications: int
    samples: np.ndarray = field(repr=False)


def tail_bound(params: GameParams, M: int, horizon: int) -> float:
    """Upper bound on the normalised payoff mass beyond ``horizon`` periods.

    Uses ``delta**T * M / (1 - delta)``, widened when a per-market payoff can exceed ``1/(1-delta)``.
    """
    d = params.delta
    g_max = max(1.0 + params.x, params.y, 1.0 / (1.0 - d))
    return d**horizon * M * g_max


def horizon_for(params: GameParams, M: int, tol: float) -> int:
    d = params.delta
    g_max = max(1.0 + params.x, params.y, 1.0 / (1.0 - d))
    T = max(1, math.ceil(math.log(tol / (M * g_max)) / math.log(d)))
    while tail_bound(params, M, T) > tol:
        T += 1
    return T


class _Player:
    """Per-block lookup tables for one player's product strategy."""

    def __init__(self, strategy: ProductStrategy):
        self.blocks = strategy.blocks
        self.offsets = strategy.offsets
        self.M = strategy.M
        self.K = len(strategy.blocks)
        self.actions = []
        self.tables = []
        self.weights = []
        for b in self.blocks:
            bits = np.arange(b.M)
            self.actions.append(np.array([(b.actions[s] >> bits) & 1 for s in (R, P)], dtype=bool))
            self.tables.append(b.transit_table)
            self.weights.append(1 << bits)

    def act(self, states: np.ndarray) -> np.ndarray:
        out = np.empty((states.shape[0], self.M), dtype=bool)
        for k, off in enumerate(self.offsets):
            act = self.actions[k]
            out[:, off:off + act.shape[1]] = act[states[:, k]]
        return out

    def step(self, states: np.ndarray, bad: np.ndarray, u: np.ndarray) -> np.ndarray:
        new = states.copy()
        for k, off in enumerate(self.offsets):
            w = self.weights[k]
            idx = bad[:, off:off + len(w)] @ w
            prob = self.tables[k][states[:, k], idx]
            new[:, k] ^= (u[:, k] < prob)
        return new


def _run(params, strat1, strat2, config: SimConfig, deviation_mask=None) -> SimResult:
    s1p, s2p = _Player(as_product(strat1)), _Player(as_product(strat2))
    if s1p.M != s2p.M:
        raise InvalidParameters("both strategies must cover the same markets")
    M = s1p.M
    if config.horizon is None:
        T = horizon_for(params, M, config.tail_tol)
    else:
        T = config.horizon
        bound = tail_bound(params, M, T)
        if bound > config.tail_tol:
            raise TruncationError(
                f"horizon {T} leaves a tail of up to {bound:.3g} > {config.tail_tol:.3g}"
            )
    d, p = params.delta, params.p
    table = payoff_table(params)
    disc = (1 - d) * d ** np.arange(T)
    N = config.replications
    K1, K2 = s1p.K, s2p.K
    dev_bits = None
    if deviation_mask is not None:
        dev_bits = ((deviation_mask >> np.arange(M)) & 1).astype(bool)

    payoffs = np.empty((N, 2))
    occupancy = np.zeros(4)
    first = np.zeros(4)
    n_chunks = -(-N // CHUNK)
    for c in range(n_chunks):
        rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(c,)))
        u_sig = rng.random((T, CHUNK, 2, M))
        u_tr1 = rng.random((T, CHUNK, K1))
        u_tr2 = rng.random((T, CHUNK, K2))
        n = min(CHUNK, N - c * CHUNK)
        st1 = np.full((n, K1), config.start_states[0], dtype=np.int64)
        st2 = np.full((n, K2), config.start_states[1], dtype=np.int64)
        acc = np.zeros((n, 2))
        for t in range(T):
            if K1 == K2:
                occupancy += np.bincount((2 * st1 + st2).ravel(), minlength=4)
                if t == 1:
                    first += np.bincount((2 * st1 + st2).ravel(), minlength=4)
            a1 = s1p.act(st1)
            if t == 0 and dev_bits is not None:
                a1 = np.broadcast_to(dev_bits, a1.shape)
            a2 = s2p.act(st2)
            acc[:, 0] += disc[t] * table[a1.astype(int), a2.astype(int)].sum(axis=1)
            acc[:, 1] += disc[t] * table[a2.astype(int), a1.astype(int)].sum(axis=1)
            if t == T - 1:
                break
            u = u_sig[t, :n]
            # right signal with probability p: bad exactly when the opponent defected
            bad1 = np.where(u[:, 0] < p, a2, ~a2)
            bad2 = np.where(u[:, 1] < p, a1, ~a1)
            if config.player1_mode == "automaton":
                st1 = s1p.step(st1, bad1, u_tr1[t, :n])
            st2 = s2p.step(st2, bad2, u_tr2[t, :n])
        payoffs[c * CHUNK:c * CHUNK + n] = acc
    if T == 1 and K1 == K2:
        first[:] = np.nan
    mean = payoffs.mean(axis=0)
    se = payoffs.std(axis=0, ddof=1) / math.sqrt(N) if N > 1 else np.zeros(2)
    occ_total = occupancy.sum()
    f_total = first.sum()
    return SimResult(
        mean_payoff=mean,
        std_error=se,
        state_occupancy={k: float(v / occ_total) for k, v in zip(JOINT_STATES, occupancy)} if occ_total else {},
        next_state_freq={k: float(v / f_total) for k, v in zip(JOINT_STATES, first)} if f_total > 0 else {},
        horizon=T,
        replications=N,
        samples=payoffs,
    )


def simulate(params: GameParams, strategies, config: SimConfig) -> SimResult:
    """Simulate the repeated game; ``strategies`` is one strategy (used by both) or a pair.

    Payoffs accrue the expected stage payoff of each market's action pair; the
    signals drive the automata only. ``mean_payoff[i]`` is player ``i+1``'s estimate.
    """
    if isinstance(strategies, (TwoStateStrategy, ProductStrategy)):
        strategies = (strategies, strategies)
    return _run(params, strategies[0], strategies[1], config)


def simulate_unilateral(params: GameParams, strategy: TwoStateStrategy, dev, config: SimConfig) -> SimResult:
    """Player 1 plays a deviation vector in period 0 and conforms afterwards.

    ``dev`` is ``(d_A, d_B, opponent_state)``; player 1's own automaton starts at R
    and updates on its own signals from period 0 on.
    """
    d_A, d_B, opp = dev
    mask = strategy.structure.deviation_vector(d_A, d_B)
    cfg = SimConfig(
        horizon=config.horizon,
        replications=config.replications,
        seed=config.seed,
        start_states=(R, _state(opp)),
        tail_tol=config.tail_tol,
        player1_mode="automaton",
    )
    return _run(params, strategy, strategy, cfg, deviation_mask=mask)


def one_step_distribution(params: GameParams, strategy: TwoStateStrategy, s1, s2) -> dict[str, float]:
    """Exact distribution of the joint state after one period when both follow ``strategy``."""
    s1, s2 = _state(s1), _state(s2)
    M = strategy.M
    a1, a2 = strategy.actions[s1], strategy.actions[s2]
    leave1 = float(signal_vector_probs(params, a2, M) @ strategy.transit_table[s1])
    leave2 = float(signal_vector_probs(params, a1, M) @ strategy.transit_table[s2])
    out = {}
    for n1, q1 in ((s1, 1 - leave1), (1 - s1, leave1)):
        for n2, q2 in ((s2, 1 - leave2), (1 - s2, leave2)):
            key = STATE_NAMES[n1] + STATE_NAMES[n2]
            out[key] = out.get(key, 0.0) + q1 * q2
    return out
