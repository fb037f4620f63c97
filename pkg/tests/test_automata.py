import json
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from fuzzbis.automata import (FINAL_NAME, INIT_NAME, AutomatonError, FuzzyAutomaton, automaton_from_json,
                              check_forward_bisimulation, correspondence_check, extend_relation,
                              greatest_forward_bisimulation, load_automaton, reserved_names, to_kripke)
from fuzzbis.generators import random_automaton, random_relation, split_state
from fuzzbis.lattice import boolean_square, chain, get_lattice
from fuzzbis.model import model_stats
from fuzzbis.relation import DomainError, FuzzyRelation, FuzzySet

from oracles import brute_greatest_forward, is_forward_bisimulation


def single(L, name, sigma, tau, alphabet=("x",), loop=None):
    trans = {}
    if loop is not None:
        trans = {alphabet[0]: FuzzyRelation(L, [name], [name], [[loop]])}
    return FuzzyAutomaton(L, [name], alphabet, trans, FuzzySet(L, [name], [sigma]), FuzzySet(L, [name], [tau]))


def test_identity_is_forward_bisimulation(bundled):
    A = load_automaton(bundled / "aut_a.json")
    assert check_forward_bisimulation(A, A, FuzzyRelation.identity(A.lattice, A.states)).holds


def test_all_one_fails_terminal():
    L = get_lattice("godel")
    A = single(L, "a", L.top, L.top)
    B = single(L, "b", L.top, L.bottom)
    rep = check_forward_bisimulation(A, B, FuzzyRelation.ones(L, A.states, B.states))
    v = rep.by_condition("terminal-AB")
    assert v and v[0].lhs == 1 and v[0].rhs == 0


@pytest.mark.parametrize("name", ["godel", "lukasiewicz", "product"])
@pytest.mark.parametrize("t,t2", [(F(8, 10), F(1, 2)), (F(1, 3), F(1)), (F(0), F(0))])
def test_single_state_bound(name, t, t2):
    L = get_lattice(name)
    res = greatest_forward_bisimulation(single(L, "a", L.top, t), single(L, "b", L.top, t2))
    assert res.relation("a", "b") == L.meet(L.residuum(t, t2), L.residuum(t2, t))


def test_greatest_on_self_is_reflexive(bundled):
    A = load_automaton(bundled / "aut_b.json")
    res = greatest_forward_bisimulation(A, A)
    assert all(res.relation(s, s) == 1 for s in A.states)
    assert res.initial_ok and res.exists


def test_bundled_pair(bundled):
    A, B = load_automaton(bundled / "aut_a.json"), load_automaton(bundled / "aut_b.json")
    res = greatest_forward_bisimulation(A, B)
    assert res.exact and res.initial_ok
    assert check_forward_bisimulation(A, B, res.relation).holds
    assert res.relation("a1", "b1") == res.relation("a1", "b2") == 1


def test_initial_failure_reported():
    L = get_lattice("godel")
    A = single(L, "a", L.top, L.top)
    B = single(L, "b", F(1, 2), L.top)
    res = greatest_forward_bisimulation(A, B)
    assert res.relation("a", "b") == 1
    assert not res.initial_ok
    assert [v.condition for v in res.initial_violations] == ["initial-AB"]


@settings(max_examples=20)
@given(seed=st.integers(0, 10**6))
def test_greatest_matches_brute_force_on_chain(seed):
    L = chain(3)
    rng = random.Random(seed)
    A = random_automaton(L, rng, 2, ["x"], "a")
    B = random_automaton(L, rng, 2, ["x"], "b")
    Z = greatest_forward_bisimulation(A, B).relation
    best = brute_greatest_forward(L, A, B)
    assert all(Z(a, b) == best[a, b] for a, b in best)


@settings(max_examples=30)
@pytest.mark.parametrize("name", ["godel", "lukasiewicz", "product", "chain:3", "boolean4"])
@given(seed=st.integers(0, 10**6))
def test_solver_sound(name, seed):
    L = get_lattice(name)
    rng = random.Random(seed)
    A = random_automaton(L, rng, rng.randint(1, 3), ["x", "y"], "a")
    B = random_automaton(L, rng, rng.randint(1, 3), ["x", "y"], "b")
    res = greatest_forward_bisimulation(A, B)
    assert res.certified
    assert check_forward_bisimulation(A, B, res.relation, skip_initial=True).holds


@settings(max_examples=40)
@pytest.mark.parametrize("name", ["godel", "boolean4"])
@given(seed=st.integers(0, 10**6))
def test_checker_agrees_with_oracle(name, seed):
    L = get_lattice(name)
    rng = random.Random(seed)
    A = random_automaton(L, rng, rng.randint(1, 3), ["x"], "a")
    B, Z = split_state(A, rng.choice(A.states)) if rng.random() < 0.5 else \
        (random_automaton(L, rng, 2, ["x"], "b"), None)
    if Z is None:
        Z = random_relation(L, rng, A.states, B.states)
    Zd = {(a, b): Z(a, b) for a in A.states for b in B.states}
    assert check_forward_bisimulation(A, B, Z).holds == is_forward_bisimulation(L, A, B, Zd)


# -- Kripke correspondence ---------------------------------------------------

def test_to_kripke_single_state():
    L = get_lattice("godel")
    M = to_kripke(single(L, "a", F(6, 10), F(8, 10)))
    x = M.action("x")
    assert x(INIT_NAME, "a") == F(6, 10) and x("a", FINAL_NAME) == F(8, 10)
    assert x(INIT_NAME, FINAL_NAME) == 0 and x("a", INIT_NAME) == 0 and x(FINAL_NAME, "a") == 0


def test_to_kripke_empty_alphabet():
    L = get_lattice("godel")
    M = to_kripke(single(L, "a", L.top, L.top, alphabet=()))
    assert M.size == 3 and set(M.props) == {"i", "f"} and not M.actions
    assert M.prop("i")[M.index[INIT_NAME]] == 1 and M.prop("f")[M.index[FINAL_NAME]] == 1


def test_reserved_name_collision():
    L = get_lattice("godel")
    A = single(L, INIT_NAME, L.top, L.top)
    assert reserved_names(A) == (INIT_NAME + "1", FINAL_NAME)
    M = to_kripke(A)
    assert M.states == (INIT_NAME, INIT_NAME + "1", FINAL_NAME)


@settings(max_examples=30)
@pytest.mark.parametrize("name", ["godel", "chain:3"])
@given(seed=st.integers(0, 10**6))
def test_to_kripke_counts(name, seed):
    L = get_lattice(name)
    rng = random.Random(seed)
    A = random_automaton(L, rng, rng.randint(1, 3), ["x", "y"][:rng.randint(0, 2)])
    M = to_kripke(A)
    assert M.size == A.size + 2
    stats = model_stats(M)
    extra = sum(1 for v in A.initial.values if v != L.bottom) + sum(1 for v in A.terminal.values if v != L.bottom)
    for c in A.alphabet:
        own = sum(1 for _ in A.transitions[c].entries())
        assert stats.per_action_edges[c] == own + extra


def test_correspondence_bundled(bundled):
    A, B = load_automaton(bundled / "aut_a.json"), load_automaton(bundled / "aut_b.json")
    rep = correspondence_check(A, B, greatest_forward_bisimulation(A, B).relation)
    assert rep.direction1.status == "confirmed" and rep.direction2.status == "confirmed"
    same = correspondence_check(A, A, FuzzyRelation.identity(A.lattice, A.states))
    assert same.holds and same.direction1.status == "confirmed"


def test_injected_pair_breaks_harmony(bundled):
    A = load_automaton(bundled / "aut_a.json")
    Z = FuzzyRelation.identity(A.lattice, A.states)
    Z2 = extend_relation(A, A, Z).replace(INIT_NAME, FINAL_NAME, A.lattice.top)
    rep = correspondence_check(A, A, Z, Z2)
    assert {v.condition for v in rep.kripke.violations} >= {"FB1"}
    assert rep.direction1.status == "vacuous" and rep.direction2.status == "not covered" and rep.holds


def test_empty_alphabet_not_covered():
    # no letters: the models forget sigma and tau, so Z2 is a bisimulation while Z is not
    L = get_lattice("godel")
    A = single(L, "a", L.top, L.top, alphabet=())
    B = single(L, "b", L.bottom, L.bottom, alphabet=())
    Z = FuzzyRelation.ones(L, A.states, B.states)
    rep = correspondence_check(A, B, Z)
    assert rep.kripke.holds and not rep.automata.holds
    assert rep.direction1.status == "not covered"


def test_non_linear_direction2_not_covered(bundled):
    L = boolean_square()
    A = single(L, "a", L.top, L.top, loop=L.top)
    rep = correspondence_check(A, A, FuzzyRelation.identity(L, A.states))
    assert rep.direction2.status == "not covered" and rep.direction1.status == "confirmed"


@settings(max_examples=40)
@pytest.mark.parametrize("name", ["godel", "chain:3"])
@given(seed=st.integers(0, 10**6))
def test_round_trip_property(name, seed):
    L = get_lattice(name)
    rng = random.Random(seed)
    A = random_automaton(L, rng, rng.randint(1, 3), ["x", "y"][:rng.randint(1, 2)], "a")
    if rng.random() < 0.5:
        B, Z = split_state(A, rng.choice(A.states))
    else:
        B = random_automaton(L, rng, rng.randint(1, 3), A.alphabet, "b")
        Z = greatest_forward_bisimulation(A, B).relation if rng.random() < 0.5 else \
            random_relation(L, rng, A.states, B.states)
    rep = correspondence_check(A, B, Z)
    assert rep.direction1.ok and rep.direction2.ok


# -- IO ----------------------------------------------------------------------

@settings(max_examples=30)
@pytest.mark.parametrize("name", ["godel", "product", "boolean4"])
@given(seed=st.integers(0, 10**6))
def test_json_round_trip(name, seed):
    L = get_lattice(name)
    A = random_automaton(L, random.Random(seed), 3, ["x", "y"])
    B = automaton_from_json(json.loads(json.dumps(A.to_json())), L)
    assert B.states == A.states and B.initial == A.initial and B.terminal == A.terminal
    assert all(B.transitions[c].table == A.transitions[c].table for c in A.alphabet)


@pytest.mark.parametrize("doc", [
    {"states": [], "alphabet": []},
    {"states": ["a", "a"], "alphabet": []},
    {"states": ["a"], "alphabet": ["x"], "transitions": {"y": []}},
    {"states": ["a"], "alphabet": [], "initial": {"zz": "1"}},
    {"states": ["a"], "alphabet": [], "initial": {"a": "2"}},
])
def test_bad_documents(doc):
    with pytest.raises((AutomatonError, ValueError)):
        automaton_from_json(doc, "godel")


def test_mismatched_pair():
    L = get_lattice("godel")
    with pytest.raises(DomainError):
        check_forward_bisimulation(single(L, "a", 1, 1), single(L, "b", 1, 1, alphabet=("y",)),
                                   FuzzyRelation.ones(L, ["a"], ["b"]))
    with pytest.raises(DomainError):
        greatest_forward_bisimulation(single(L, "a", 1, 1), single(get_lattice("product"), "b", 1, 1))
