import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from fuzzbis.generators import random_formula
from fuzzbis.lattice import chain, get_lattice
from fuzzbis.syntax import (FULL, KZ_FRAGMENT, And, Atomic, Box, Compose, Const, Constructor, Diamond,
                            FragmentSpec, Implies, ImpliesFromConst, ImpliesToConst, Not, Or, ParseError,
                            Prop, Star, Test, Union_, big_wedge, depth, in_fragment, is_fKz,
                            parse_formula, parse_program, smallest_fragment, to_text)

G = get_lattice("godel")
p, q, r = Prop("p"), Prop("q"), Atomic("r")


@pytest.mark.parametrize("text,tree", [
    ("<r>p", Diamond(r, p)),
    ("[r*]p", Box(Star(r), p)),
    ("p /\\ q \\/ p", Or(And(p, q), p)),
    ("p -> q -> p", Implies(p, Implies(q, p))),
    ("0.5 -> p", ImpliesFromConst(F(1, 2), p)),
    ("p -> 3/4", ImpliesToConst(p, F(3, 4))),
    ("~<r>p", Not(Diamond(r, p))),
    ("[p?]q", Box(Test(p), q)),
    ("<r;s|r*>p", Diamond(Union_(Compose(r, Atomic("s")), Star(r)), p)),
    ("<(p /\\ q)?;r>1", Diamond(Compose(Test(And(p, q)), r), Const(F(1)))),
])
def test_parse(text, tree):
    assert parse_formula(text, G) == tree


@pytest.mark.parametrize("text,pos", [("p /\\", 4), ("<r p", 3), ("p q", 2), ("[r]", 3)])
def test_parse_errors_have_positions(text, pos):
    with pytest.raises(ParseError) as err:
        parse_formula(text, G)
    assert err.value.position == pos


def test_out_of_carrier_constant():
    with pytest.raises(Exception):
        parse_formula("1.5 -> p", G)


def test_finite_lattice_labels():
    L = chain(3)
    assert parse_formula("'1/2' -> p", L) == ImpliesFromConst(F(1, 2), p)


@given(seed=st.integers(0, 10**6), d=st.integers(0, 4))
def test_print_parse_round_trip(seed, d):
    phi = random_formula(G, random.Random(seed), d, ["p", "q"], ["r", "s"])
    assert parse_formula(to_text(phi, G), G) == phi


@given(seed=st.integers(0, 10**6))
def test_random_formula_respects_fragment(seed):
    frag = FragmentSpec.of("|", "->", "?")
    phi = random_formula(G, random.Random(seed), 3, ["p"], ["r"], frag)
    assert in_fragment(phi, frag)
    assert smallest_fragment(phi).excluded >= frag.excluded


@given(seed=st.integers(0, 10**6))
def test_fragment_monotone(seed):
    # anything in a smaller fragment is in every larger one
    phi = random_formula(G, random.Random(seed), 3, ["p"], ["r"])
    small = smallest_fragment(phi)
    for c in Constructor:
        bigger = FragmentSpec(small.excluded - {c})
        assert in_fragment(phi, bigger)
    assert in_fragment(phi, FULL)


def test_fkz_membership():
    assert is_fKz(And(Diamond(r, p), ImpliesToConst(q, F(1, 2))))
    assert not is_fKz(Box(r, p))
    assert not is_fKz(Diamond(Star(r), p))
    assert not is_fKz(Or(p, q))
    assert not is_fKz(Implies(p, q))
    assert in_fragment(Diamond(r, p), KZ_FRAGMENT)


def test_depth_and_wedge():
    assert depth(p) == 0
    assert depth(Diamond(r, And(p, q))) == 2
    assert big_wedge([], F(1)) == Const(F(1))
    assert big_wedge([p, q], F(1)) == And(p, And(q, Const(F(1))))


def test_program_parse():
    assert parse_program("r;s*", G) == Compose(r, Star(Atomic("s")))
    assert parse_program("p?|r", G) == Union_(Test(p), r)


def test_fragment_markers():
    assert FragmentSpec.of("union", "->").excluded == {Constructor.UNION, Constructor.IMPLIES}
    with pytest.raises(ValueError):
        FragmentSpec.of("xor")
