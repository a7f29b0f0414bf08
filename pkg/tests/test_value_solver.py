import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from multimarket import (
    ConditionViolated, GameParams, MarketStructure, check_ntpd2_condition, check_ntpdM_conditions,
    ev_closed_forms, make_ev, make_ntpd, ntpd2_closed_forms, ntpdM_closed_forms, solve_value_equations,
)
from multimarket.strategies import NTPDParams
from multimarket.value_solver import (
    ev_closed_payoff, ev_transition_solve, indifference_residuals, ntpd_limit_payoff,
)

from oracles import ev_grid_search, value_iteration
from strategies_hyp import game_params, patient_params

G = GameParams(0.1, 0.1, 0.9, 0.7)


@pytest.mark.parametrize("p, expected", [(0.9, 0.9875), (0.6, 0.8), (0.999999, 1.0)])
def test_ev_payoff(p, expected):
    assert ev_closed_payoff(G.replace(p=p)) == pytest.approx(expected, abs=1e-6)


def test_ntpd2_reference_point():
    cf = ntpd2_closed_forms(G)
    assert cf.V_P == pytest.approx(1.125, abs=1e-12)
    assert cf.V_R == pytest.approx(1.8344594594594594, abs=1e-12)
    assert cf.V_R > cf.V_P
    assert 0 < cf.eps <= 1
    assert 0 < cf.eps_hat <= 0.5


def test_ntpd2_rejects_large_gain():
    with pytest.raises(ConditionViolated) as info:
        ntpd2_closed_forms(GameParams(1.0, 0.5, 0.9, 0.9))
    assert info.value.slacks["ntpd2"] < 0


def test_ntpdM_punishment_value():
    cf = ntpdM_closed_forms(G, MarketStructure(6, 3), check=False)
    # M_A + p M_A x/(p - s) + s^3 M_B y/(p^3 - s^3)
    want = 3 + 0.9 * 0.3 / 0.8 + 0.001 * 0.3 / (0.729 - 0.001)
    assert cf.V_P == pytest.approx(want, abs=1e-12)
    assert cf.V_P == pytest.approx(3.33791, abs=1e-5)


def test_ntpdM_rejects_when_conditions_fail():
    with pytest.raises(ConditionViolated) as info:
        ntpdM_closed_forms(G, MarketStructure(6, 3))
    assert set(info.value.slacks) == {"first", "second"}


@given(patient_params())
def test_general_forms_specialise_to_two_markets(g):
    two = MarketStructure(2, 1)
    assume(check_ntpd2_condition(g).holds)
    a = ntpd2_closed_forms(g)
    b = ntpdM_closed_forms(g, two, check=False)
    for k in ("V_R", "V_P", "eps", "eps_hat"):
        assert getattr(b, k) == pytest.approx(getattr(a, k), rel=1e-12, abs=1e-12)


def test_limit_payoff_for_many_markets():
    g = GameParams(0.1, 0.1, 0.9, 0.999)
    structure = MarketStructure(80, 40)
    cf = ntpdM_closed_forms(g, structure, check=False)
    assert cf.V_R == pytest.approx(ntpd_limit_payoff(g, structure), rel=1e-9)
    assert ntpd_limit_payoff(g, structure) / 80 == pytest.approx(1 - 0.5 * 0.1 * 0.1 / 0.8)


@pytest.mark.parametrize("M, M_A, p, delta", [(2, 1, 0.9, 0.7), (4, 2, 0.8, 0.8), (6, 3, 0.75, 0.7), (5, 2, 0.8, 0.9)])
def test_value_solve_matches_value_iteration(M, M_A, p, delta):
    g = GameParams(0.1, 0.1, p, delta)
    structure = MarketStructure(M, M_A)
    cf = ntpdM_closed_forms(g, structure, check=False)
    strat = make_ntpd(g, structure, cf.ntpd_params())
    vm = solve_value_equations(g, strat)
    oracle = value_iteration(g, strat)
    for k, v in oracle.items():
        assert vm.entry(*k) == pytest.approx(v, abs=1e-9)


def test_value_solve_reproduces_two_market_identities():
    cf = ntpd2_closed_forms(G)
    vm = solve_value_equations(G, make_ntpd(G, MarketStructure(2, 1), cf.ntpd_params()))
    assert vm.V_RR == pytest.approx(1.83446, abs=1e-5)
    assert vm.V_PR == pytest.approx(vm.V_RR, abs=1e-9)
    assert vm.V_RP == pytest.approx(1.125, abs=1e-9)
    assert vm.V_PP == pytest.approx(1.125, abs=1e-9)
    assert vm.is_belief_free()


def test_ev_value_solve():
    cf = ev_closed_forms(G)
    vm = solve_value_equations(G, make_ev(G, cf.ev_params()))
    assert vm.V_RR == pytest.approx(0.9875, abs=1e-12)
    assert vm.V_PR == pytest.approx(0.9875, abs=1e-12)
    assert vm.is_belief_free()


def test_short_horizon_limit():
    g = G.replace(delta=1e-9)
    structure = MarketStructure(6, 3)
    strat = make_ntpd(g, structure, NTPDParams(0.5, 0.05))
    vm = solve_value_equations(g, strat)
    assert vm.V_RR == pytest.approx(6.0, abs=1e-6)
    assert vm.V_PP == pytest.approx(3.0, abs=1e-6)


def test_ev_transitions_against_grid_search():
    cf = ev_transition_solve(G)
    gap, eR, eP = ev_grid_search(G)
    assert gap < 1e-6
    assert cf.eps_R == pytest.approx(eR, abs=1e-5)
    assert cf.eps_P == pytest.approx(eP, abs=1e-5)
    assert 0 < cf.eps_R <= 1 and 0 < cf.eps_P <= 1
    assert cf.eps_R == pytest.approx(0.054945, abs=1e-6)


def test_ev_transition_solve_rejects_impatience():
    with pytest.raises(ConditionViolated):
        ev_transition_solve(G.replace(delta=0.05))


def test_ev_transitions_stay_finite_near_perfect_monitoring():
    g = G.replace(p=0.9999)
    cf = ev_closed_forms(g)
    assert np.isfinite(cf.eps_R) and 0 < cf.eps_R <= 1
    assert cf.V_R == pytest.approx(1.0, abs=1e-3)


@given(game_params())
def test_ev_closed_forms_are_belief_free(g):
    assume(ev_closed_forms(g, check=False).eps_R <= 1 and ev_closed_forms(g, check=False).eps_P <= 1)
    cf = ev_closed_forms(g, check=False)
    assume(cf.eps_R > 0 and cf.eps_P > 0)
    vm = solve_value_equations(g, make_ev(g, cf.ev_params()))
    assert vm.belief_free_gap <= 1e-9
    assert vm.V_R == pytest.approx(cf.V_R, abs=1e-9)
    assert vm.V_P == pytest.approx(cf.V_P, abs=1e-9)


@given(patient_params(), st.sampled_from([(2, 1), (3, 1), (4, 2), (5, 2), (6, 3), (7, 3)]))
def test_indifference_identity(g, shape):
    structure = MarketStructure(*shape)
    assume(check_ntpdM_conditions(g, structure).holds)
    cf = ntpdM_closed_forms(g, structure)
    vm = solve_value_equations(g, make_ntpd(g, structure, cf.ntpd_params()))
    for r in indifference_residuals(g, structure, cf, vm).values():
        assert abs(r) <= 1e-9
    # two-market form: (1 - d) x = d (2p - 1) eps_hat (V_R - V_P)
    if structure.M == 2:
        assert (1 - g.delta) * g.x == pytest.approx(g.delta * (2 * g.p - 1) * cf.eps_hat * (cf.V_R - cf.V_P))


def test_two_market_indifference_identity():
    cf = ntpd2_closed_forms(G)
    lhs = (1 - G.delta) * G.x
    rhs = G.delta * (2 * G.p - 1) * cf.eps_hat * (cf.V_R - cf.V_P)
    assert lhs == pytest.approx(rhs, abs=1e-12)


@pytest.mark.parametrize("p", [0.7, 0.8, 0.9, 0.95])
def test_two_market_payoff_decreases_in_delta(p):
    deltas = np.linspace(0.3, 0.99, 200)
    vals = []
    for d in deltas:
        g = GameParams(0.1, 0.1, p, float(d))
        if check_ntpd2_condition(g).holds:
            vals.append(ntpd2_closed_forms(g).V_R)
    assert len(vals) > 10
    assert all(b < a for a, b in zip(vals, vals[1:]))
