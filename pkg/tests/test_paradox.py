import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from congames.equilibrium import SolverOptions, brute_force_icue
from congames.families import constructive_ibpsc, sample_instance
from congames.game_core import CostFunction, GameError
from congames.paradox import (
    DominanceError,
    Expansion,
    ExpansionError,
    check_not_all_worse,
    detect_bp,
    detect_ibp,
    detect_ibpsc,
    expand_information,
    replay_witness,
    search_paradox,
)
from congames.pathsets import build_strategy_sets
from congames.scenarios import builtin_scenario
from congames.topology import is_sli

from conftest import ring_game, wheatstone_game


# ---------------------------------------------------------------------------
# expansion


def test_fig3_expansion_doubles_strategy_set():
    sc = builtin_scenario("two_pop_ring")
    expanded = expand_information(sc.game, sc.expansion)
    sets = build_strategy_sets(expanded)
    assert sets[("1", 1)].paths == (("e1", "e2"), ("e3", "e4"))


def test_pigou_expansion_reveals_both_edges():
    sc = builtin_scenario("pigou_ibpsc")
    expanded = expand_information(sc.game, sc.expansion)
    assert expanded.info_type(("1", 1)).known_edges == frozenset({"e1", "e2"})


def test_useless_expansion_warns():
    # Adding one edge of the far arc opens no new route on a 5-ring.
    game = ring_game(5, terminals=(0, 2), known={"r1", "r2"})
    with pytest.warns(UserWarning, match="no usable route"):
        expand_information(game, Expansion(("1", 1), frozenset({"r3"})))


def test_non_strict_expansion_rejected():
    game = ring_game(5, terminals=(0, 2), known={"r1", "r2"})
    with pytest.raises(ExpansionError):
        expand_information(game, Expansion(("1", 1), frozenset({"r1"})))


def test_expansion_outside_relevant_rejected():
    game = wheatstone_game(CostFunction.impassable(), known={"O1", "1D", "O2", "2D"})
    with pytest.raises(ExpansionError):
        expand_information(game, Expansion(("1", 1), frozenset({"ghost"})))


def test_full_information_type_admits_no_expansion():
    game = ring_game(4)
    with pytest.raises(ExpansionError):
        expand_information(game, Expansion(("1", 1), frozenset({"r1"})))


# ---------------------------------------------------------------------------
# IBP


def test_fig3_circuit_game_immune():
    sc = builtin_scenario("two_pop_ring")
    verdict = detect_ibp(sc.game, sc.expansion)
    assert not verdict.occurred


def test_wheatstone_information_expansion_hurts():
    # Cross-checked against the exhaustive oracle on both games.
    sc = builtin_scenario("wheatstone_ibp")
    verdict = detect_ibp(sc.game, sc.expansion)
    assert verdict.occurred
    assert verdict.before.type_costs[("1", 1)].value == pytest.approx(1.5, abs=1e-6)
    assert verdict.after.type_costs[("1", 1)].value == pytest.approx(2.0, abs=1e-6)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        expanded = expand_information(sc.game, sc.expansion)
    oracle_before = brute_force_icue(sc.game)
    oracle_after = brute_force_icue(expanded)
    assert oracle_before.type_costs[("1", 1)].value == pytest.approx(1.5, abs=1e-3)
    assert oracle_after.type_costs[("1", 1)].value == pytest.approx(2.0, abs=1e-3)


def test_expansion_without_new_routes_changes_nothing():
    game = ring_game(5, terminals=(0, 2), known={"r1", "r2"})
    verdict = detect_ibp(game, Expansion(("1", 1), frozenset({"r3"})))
    assert not verdict.occurred
    assert verdict.delta == pytest.approx(0.0, abs=1e-12)
    assert verdict.after.social_cost == pytest.approx(verdict.before.social_cost)


# ---------------------------------------------------------------------------
# IBPSC


def test_pigou_social_cost_three_to_four():
    sc = builtin_scenario("pigou_ibpsc")
    verdict = detect_ibpsc(sc.game, sc.expansion)
    assert verdict.occurred
    assert verdict.before.social_cost == pytest.approx(3.0, abs=1e-6)
    assert verdict.after.social_cost == pytest.approx(4.0, abs=1e-6)
    side = detect_ibp(sc.game, sc.expansion)
    assert not side.occurred


def test_fig3_ibpsc_vs_ibp_disentangled():
    # The ring criterion protects the informed type, not the social cost:
    # verify IBP is false and record the social-cost delta against the
    # exhaustive oracle.
    sc = builtin_scenario("two_pop_ring")
    sc_verdict = detect_ibpsc(sc.game, sc.expansion)
    ibp_verdict = detect_ibp(sc.game, sc.expansion)
    assert not ibp_verdict.occurred
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        expanded = expand_information(sc.game, sc.expansion)
    oracle_delta = (
        brute_force_icue(expanded).social_cost - brute_force_icue(sc.game).social_cost
    )
    assert sc_verdict.delta == pytest.approx(oracle_delta, abs=2e-3)
    assert sc_verdict.occurred == (sc_verdict.delta > 1e-6)


# ---------------------------------------------------------------------------
# BP


def test_fig1_cost_reduction_raises_social_cost():
    sc = builtin_scenario("wheatstone_bp")
    verdict = detect_bp(sc.game, sc.modified_costs)
    assert verdict.occurred
    assert verdict.before.social_cost == pytest.approx(1.5, abs=1e-6)
    assert verdict.after.social_cost == pytest.approx(2.0, abs=1e-6)


def test_identical_games_no_bp():
    sc = builtin_scenario("wheatstone_bp")
    verdict = detect_bp(sc.game, {})
    assert not verdict.occurred
    assert verdict.delta == pytest.approx(0.0, abs=1e-12)


def test_dominance_violation_rejected():
    sc = builtin_scenario("wheatstone_bp")
    with pytest.raises(DominanceError):
        detect_bp(sc.game, {"O1": CostFunction.polynomial([0.0, 2.0])})


def test_demand_increase_rejected():
    sc = builtin_scenario("wheatstone_bp")
    with pytest.raises(DominanceError):
        detect_bp(sc.game, {}, {("1", 1): 2.0})


def test_big_m_to_finite_is_a_reduction():
    sc = builtin_scenario("wheatstone_bp")
    verdict = detect_bp(sc.game, {"12": CostFunction.constant(0.25)})
    assert verdict.after.social_cost >= verdict.before.social_cost - 1e-9


@settings(max_examples=20)
@given(st.integers(0, 5000))
def test_cost_reduction_on_sli_chain_never_bp(seed):
    # Single-OD SLI networks are immune to the classic paradox; reduce a
    # random edge's coefficients and check the social cost never rises.
    sample = sample_instance("sli_chains", 17, seed)
    game = sample.game
    pop = game.populations[0]
    assert is_sli(game.network, pop.origin, pop.destination).is_sli
    rng = np.random.default_rng(seed)
    eid = sorted(game.costs)[int(rng.integers(0, len(game.costs)))]
    old = game.cost(eid)
    reduced = CostFunction.polynomial([c * float(rng.uniform(0.2, 0.9)) for c in old.coeffs])
    verdict = detect_bp(game, {eid: reduced})
    assert not verdict.occurred


# ---------------------------------------------------------------------------
# not-all-worse


def test_fig3_not_all_worse():
    sc = builtin_scenario("two_pop_ring")
    report = check_not_all_worse(sc.game, sc.expansion)
    assert report.ok
    assert set(report.deltas) == {("1", 1), ("1", 2), ("2", 1)}


def test_unchanged_equilibrium_all_deltas_zero():
    game = ring_game(5, terminals=(0, 2), known={"r1", "r2"})
    report = check_not_all_worse(game, Expansion(("1", 1), frozenset({"r3"})))
    assert report.ok
    assert all(abs(d) <= 1e-9 for d in report.deltas.values())


def test_not_all_worse_requires_circuit_game():
    sc = builtin_scenario("wheatstone_ibp")
    with pytest.raises(GameError, match="circuit"):
        check_not_all_worse(sc.game, sc.expansion)


@settings(max_examples=40)
@given(st.integers(0, 10_000))
def test_random_rings_never_hurt_everyone(seed):
    sample = sample_instance("circuit_games", 55, seed)
    report = check_not_all_worse(sample.game, sample.expansion)
    assert report.ok


# ---------------------------------------------------------------------------
# search


def test_budget_zero_empty():
    result = search_paradox("circuit_games", "IBP", budget=0, seed=0)
    assert result.witnesses == []
    assert result.samples == 0


def test_pigou_family_yields_witnesses():
    result = search_paradox("pigou_embedded", "IBPSC", budget=10, seed=1)
    assert len(result.witnesses) == 10
    for w in result.witnesses:
        assert w.delta > 1e-6
        assert w.document["expansion"]


def test_circuit_family_never_yields_certified_ibp():
    result = search_paradox("circuit_games", "IBP", budget=120, seed=5)
    assert [w for w in result.witnesses if w.confidence == "certified"] == []
    assert result.witnesses == []


def test_unknown_family_rejected():
    with pytest.raises(GameError, match="unknown family"):
        search_paradox("nope", "IBP", budget=1, seed=0)


def test_witness_replay_is_bit_identical():
    result = search_paradox("wheatstone_info", "IBP", budget=30, seed=9)
    assert result.witnesses
    w = result.witnesses[0]
    v1 = replay_witness(w.document, "IBP")
    v2 = replay_witness(json.loads(json.dumps(w.document)), "IBP")
    assert v1.delta == w.delta
    assert v2.delta == w.delta
    assert v1.before.social_cost == v2.before.social_cost == w.sc_before
    assert v1.after.social_cost == v2.after.social_cost == w.sc_after


# ---------------------------------------------------------------------------
# social-cost witnesses exist on every multi-route builtin topology


@pytest.mark.parametrize(
    "scenario_id,origin,destination",
    [
        ("pigou_ibpsc", "O", "D"),
        ("wheatstone_bp", "O", "D"),
        ("grid_2x3", "n00", "n21"),
        ("two_pop_ring", "O1", "D1"),
        ("stadium_ring", "g1", "g5"),
    ],
)
def test_constructive_social_cost_witness_on_builtin_topologies(
    scenario_id, origin, destination
):
    net = builtin_scenario(scenario_id).game.network
    sample = constructive_ibpsc(net, origin, destination, np.random.default_rng(3))
    verdict = detect_ibpsc(sample.game, sample.expansion)
    assert verdict.occurred
