import json
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from fuzzbis.generators import ModelGenConfig, random_formula, random_model
from fuzzbis.lattice import chain, get_lattice
from fuzzbis.model import (ModelError, eval_formula, eval_formula_vector, eval_program, load_model,
                           model_from_json, model_stats, resolve_lattice, star_closure)
from fuzzbis.relation import compose, sup_relations
from fuzzbis.syntax import Atomic, Star, parse_formula, parse_program

from oracles import paths_star

# values of <r>p, [r]p, <r*>p, [r*]p at u for the bundled model
EX22 = {
    "godel": ("0.7", "0.5", "0.9", "0.5"),
    "lukasiewicz": ("0.5", "0.9", "0.9", "0.9"),
    "product": ("0.56", "5/6", "0.9", "5/6"),
}


@pytest.mark.parametrize("name", list(EX22))
def test_example_table(bundled, name):
    M = load_model(bundled / "ex22.json", name)
    L = M.lattice
    got = [eval_formula(M, parse_formula(t, L), "u") for t in ("<r>p", "[r]p", "<r*>p", "[r*]p")]
    assert got == [F(v) for v in EX22[name]]


def test_example_by_hand_product(bundled):
    # <r>p(u) = max(0.6*0.5, 0.7*0.8); [r]p(u) = min(0.6 -> 0.5, 0.7 -> 0.8) = 0.5/0.6
    M = load_model(bundled / "ex22.json", "product")
    assert eval_formula(M, parse_formula("<r>p", M.lattice), "u") == max(F(3, 10), F(56, 100))
    assert eval_formula(M, parse_formula("[r]p", M.lattice), "u") == F(5, 10) / F(6, 10)


def test_lattice_precedence(bundled, monkeypatch):
    doc = json.loads((bundled / "ex22.json").read_text())
    assert model_from_json(doc).lattice.name == "godel"
    monkeypatch.setenv("FUZZBIS_LATTICE", "product")
    assert model_from_json(doc).lattice.name == "product"
    assert model_from_json(doc, "lukasiewicz").lattice.name == "lukasiewicz"
    assert resolve_lattice(None).name == "product"
    monkeypatch.delenv("FUZZBIS_LATTICE")
    assert resolve_lattice(None).name == "godel"


@pytest.mark.parametrize("doc", [
    {"states": []},
    {"states": ["a"], "props": {"p": {"b": "1"}}},
    {"states": ["a"], "actions": {"r": [["a", "b", "1"]]}},
    {"states": ["a"], "actions": {"r": [["a", "a"]]}},
    {"states": ["a"], "props": {"p": {"a": "2"}}},
    {"states": ["a", "a"]},
])
def test_bad_documents(doc):
    with pytest.raises(ModelError):
        model_from_json(doc)


def test_unknown_symbols_strict(bundled):
    M = load_model(bundled / "ex22.json")
    with pytest.raises(ModelError):
        eval_formula(M, parse_formula("q", M.lattice), "u")
    with pytest.raises(ModelError):
        eval_formula(M, parse_formula("<s>p", M.lattice), "u")
    assert eval_formula_vector(M, parse_formula("<s>p", M.lattice), strict=False) == (0, 0, 0)


@pytest.mark.parametrize("name", ["godel", "lukasiewicz", "product"])
@given(seed=st.integers(0, 10**6))
def test_star_matches_path_enumeration(name, seed):
    L = get_lattice(name)
    M = random_model(L, random.Random(seed), ModelGenConfig(max_states=4, actions=("r",)))
    S = star_closure(M.action("r"))
    expected = paths_star(L, M.action("r"))
    assert all(S(x, y) == expected[x, y] for x in M.states for y in M.states)


@given(seed=st.integers(0, 10**6))
def test_star_idempotent_and_transitive(seed):
    L = get_lattice("lukasiewicz")
    M = random_model(L, random.Random(seed))
    S = star_closure(M.action("r"))
    assert star_closure(S) == S
    assert sup_relations([S, compose(S, S)]) == S


def test_program_star_identity_on_empty():
    L = get_lattice("godel")
    M = model_from_json({"states": ["a", "b"], "actions": {"r": []}}, L)
    assert eval_program(M, Star(Atomic("r"))).table == ((1, 0), (0, 1))


@given(seed=st.integers(0, 10**6))
def test_box_diamond_duality_on_godel_negation(seed):
    # with Boolean (0/1) props and crisp edges, [r]p = ~<r>~p
    L = chain(2)
    rng = random.Random(seed)
    M = random_model(L, rng)
    lhs = eval_formula_vector(M, parse_formula("[r]p", L))
    rhs = eval_formula_vector(M, parse_formula("~<r>~p", L))
    assert lhs == rhs


@given(seed=st.integers(0, 10**6))
def test_evaluation_stays_in_carrier(seed):
    L = get_lattice("product")
    rng = random.Random(seed)
    M = random_model(L, rng, ModelGenConfig(max_states=3))
    phi = random_formula(L, rng, 3, ["p", "q"], ["r", "s"])
    assert all(L.contains(v) for v in eval_formula_vector(M, phi))


def test_model_json_round_trip(bundled):
    M = load_model(bundled / "ex33_m.json", "product")
    M2 = model_from_json(M.to_json(), "product")
    assert M2.states == M.states and M2.props == M.props
    assert M2.action("r") == M.action("r")


def test_stats(bundled):
    s = model_stats(load_model(bundled / "ex22.json"))
    assert (s.states, s.edges, s.props, s.actions) == (3, 2, 1, 1)
    assert s.image_finite and s.witnessed


def test_unknown_state(bundled):
    M = load_model(bundled / "ex22.json")
    with pytest.raises(ModelError):
        eval_formula(M, parse_formula("p", M.lattice), "zz")


def test_program_parse_eval(bundled):
    M = load_model(bundled / "ex22.json")
    R = eval_program(M, parse_program("r;r", M.lattice))
    assert all(v == 0 for _, _, v in R.entries(include_zero=True))


def test_unknown_keys_rejected():
    from fuzzbis.model import ModelError, model_from_json
    with pytest.raises(ModelError):
        model_from_json({"states": ["a"], "alphabet": []}, "godel")
