import itertools

import numpy as np
import pytest
from hypothesis import given

from multimarket import GameParams, InvalidParameters
from multimarket.stage_game import (
    ActionPair, SignalPair, expected_stage_payoff, joint_signal_dist, market_payoff,
    payoff_matrix, signal_marginal, signal_matrix, signal_vector_probs,
)

from oracles import signal_prob, stage
from strategies_hyp import game_params

G = GameParams(0.1, 0.1, 0.9, 0.7)


def test_s_is_complement_of_p():
    assert GameParams(0.1, 0.2, 0.65, 0.5).s == 1 - 0.65


@pytest.mark.parametrize("kw", [
    dict(x=0.0, y=0.1, p=0.9, delta=0.7),
    dict(x=0.1, y=0.0, p=0.9, delta=0.7),
    dict(x=1.5, y=0.4, p=0.9, delta=0.7),
    dict(x=0.1, y=0.1, p=0.5, delta=0.7),
    dict(x=0.1, y=0.1, p=1.0, delta=0.7),
    dict(x=0.1, y=0.1, p=0.9, delta=0.0),
    dict(x=0.1, y=0.1, p=0.9, delta=1.0),
    dict(x=float("nan"), y=0.1, p=0.9, delta=0.5),
    dict(x=0.1, y=0.1, p=0.5 + 1e-17, delta=0.5),
])
def test_invalid_params_rejected(kw):
    with pytest.raises(InvalidParameters):
        GameParams(**kw)


@pytest.mark.parametrize("p, opp, sig, expected", [
    (0.9, "C", "g", 0.9),
    (0.9, "C", "b", 0.1),
    (0.6, "D", "b", 0.6),
    (0.6, "D", "g", 0.4),
])
def test_signal_marginal_examples(p, opp, sig, expected):
    assert signal_marginal(G.replace(p=p), opp, sig) == pytest.approx(expected, abs=1e-15)


def test_joint_distribution_cooperation():
    dist = joint_signal_dist(G, ("C", "C"))
    assert dist[SignalPair.of("g", "g")] == pytest.approx(0.81)
    assert dist[SignalPair.of("g", "b")] == pytest.approx(0.09)
    assert dist[SignalPair.of("b", "g")] == pytest.approx(0.09)
    assert dist[SignalPair.of("b", "b")] == pytest.approx(0.01)


def test_joint_distribution_player1_sees_defection():
    dist = joint_signal_dist(G, ("C", "D"))
    marginal_bad = sum(v for k, v in dist.items() if k.w1 == 1)
    assert marginal_bad == pytest.approx(0.9)


@given(game_params())
def test_joint_distribution_sums_and_marginalises(g):
    for a in itertools.product("CD", repeat=2):
        dist = joint_signal_dist(g, a)
        assert all(v >= 0 for v in dist.values())
        assert sum(dist.values()) == pytest.approx(1.0, abs=1e-12)
        for w, code in (("g", 0), ("b", 1)):
            m1 = sum(v for k, v in dist.items() if k.w1 == code)
            m2 = sum(v for k, v in dist.items() if k.w2 == code)
            assert m1 == pytest.approx(signal_marginal(g, a[1], w), abs=1e-15)
            assert m2 == pytest.approx(signal_marginal(g, a[0], w), abs=1e-15)


@pytest.mark.parametrize("a, expected", [(("C", "C"), 1.0), (("C", "D"), -0.1), (("D", "C"), 1.1), (("D", "D"), 0.0)])
def test_stage_payoffs(a, expected):
    assert expected_stage_payoff(G, a) == pytest.approx(expected)
    assert expected_stage_payoff(G, a[::-1], player=2) == pytest.approx(expected)


def test_action_pair_rejects_unknown():
    with pytest.raises(InvalidParameters):
        ActionPair.of("C", "X")
    with pytest.raises(InvalidParameters):
        SignalPair.of("g", 3)


@given(game_params())
def test_payoff_matrix_matches_per_market_sum(g):
    M = 3
    Gm = payoff_matrix(g, M)
    for own in range(8):
        for opp in range(8):
            want = sum(stage(g.x, g.y, (own >> m) & 1, (opp >> m) & 1) for m in range(M))
            assert Gm[own, opp] == pytest.approx(want, abs=1e-12)
            assert market_payoff(g, own, opp, M) == pytest.approx(want, abs=1e-12)


@given(game_params())
def test_signal_vectors_are_products_of_marginals(g):
    M = 3
    O = signal_matrix(g, M)
    for a in range(8):
        row = signal_vector_probs(g, a, M)
        np.testing.assert_allclose(row, O[a], atol=1e-15)
        assert row.sum() == pytest.approx(1.0, abs=1e-12)
        abits = [(a >> m) & 1 for m in range(M)]
        for w in range(8):
            assert row[w] == pytest.approx(signal_prob(g.p, abits, [(w >> m) & 1 for m in range(M)]), abs=1e-15)
