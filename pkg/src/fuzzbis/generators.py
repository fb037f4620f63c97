"""Random models, relations and formulas for property tests and experiments."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .lattice import ResiduatedLattice
from .model import KripkeModel
from .relation import FuzzyRelation, FuzzySet
from .syntax import (And, Atomic, Box, Compose, Const, Constructor, Diamond, FragmentSpec, Implies,
                     ImpliesFromConst, ImpliesToConst, Not, Or, Prop, Star, Test, Union_)


@dataclass(frozen=True)
class ModelGenConfig:
    max_states: int = 4
    props: tuple = ("p", "q")
    actions: tuple = ("r", "s")
    edge_density: float = 0.5
    denominator: int = 10
    prop_zero_rate: float = 0.2


def random_value(L: ResiduatedLattice, rng: random.Random, denominator: int = 10):
    if L.is_finite:
        return rng.choice(L.elements())
    return Fraction(rng.randint(0, denominator), denominator)


def _nonzero(L, rng, denominator):
    for _ in range(50):
        v = random_value(L, rng, denominator)
        if v != L.bottom:
            return v
    return L.top


def random_model(L: ResiduatedLattice, rng: random.Random, cfg: ModelGenConfig = ModelGenConfig(),
                 n_states: int | None = None, prefix: str = "s") -> KripkeModel:
    n = n_states or rng.randint(1, cfg.max_states)
    states = [f"{prefix}{i}" for i in range(n)]
    props = {}
    for p in cfg.props:
        props[p] = [L.bottom if rng.random() < cfg.prop_zero_rate else random_value(L, rng, cfg.denominator)
                    for _ in states]
    actions = {}
    for a in cfg.actions:
        table = [[_nonzero(L, rng, cfg.denominator) if rng.random() < cfg.edge_density else L.bottom
                  for _ in states] for _ in states]
        actions[a] = FuzzyRelation(L, states, states, table)
    return KripkeModel(L, states, props, actions)


def random_pair(L, rng, cfg: ModelGenConfig = ModelGenConfig()):
    return random_model(L, rng, cfg, prefix="x"), random_model(L, rng, cfg, prefix="y")


def random_relation(L, rng, rows, cols, denominator: int = 10) -> FuzzyRelation:
    return FuzzyRelation(L, rows, cols, [[random_value(L, rng, denominator) for _ in cols] for _ in rows])


def random_automaton(L: ResiduatedLattice, rng: random.Random, n_states: int, alphabet: Sequence[str],
                     prefix: str = "a", density: float = 0.5, denominator: int = 10):
    from .automata import FuzzyAutomaton

    states = tuple(f"{prefix}{i}" for i in range(n_states))

    def vals():
        return [_nonzero(L, rng, denominator) if rng.random() < density else L.bottom for _ in states]

    trans = {c: FuzzyRelation(L, states, states, [vals() for _ in states]) for c in alphabet}
    return FuzzyAutomaton(L, states, alphabet, trans, FuzzySet(L, states, vals()), FuzzySet(L, states, vals()))


def split_state(A, state, prefix: str = "b"):
    """A copy of ``A`` in which ``state`` is duplicated.

    Incoming weight goes to both copies, so on idempotent (Goedel-style)
    t-norms the relation gluing the copies back is a forward bisimulation.
    Returns the new automaton and that relation.
    """
    from .automata import FuzzyAutomaton

    L = A.lattice
    k = A.states.index(state)
    src = list(range(A.size)) + [k]
    states = tuple(f"{prefix}{i}" for i in range(len(src)))
    trans = {c: FuzzyRelation(L, states, states, [[r.table[i][j] for j in src] for i in src])
             for c, r in A.transitions.items()}
    B = FuzzyAutomaton(L, states, A.alphabet, trans,
                       FuzzySet(L, states, [A.initial.values[i] for i in src]),
                       FuzzySet(L, states, [A.terminal.values[i] for i in src]))
    Z = FuzzyRelation(L, A.states, states, [[L.top if j_src == i else L.bottom for j_src in src]
                                            for i in range(A.size)])
    return B, Z


def random_formula(L: ResiduatedLattice, rng: random.Random, depth: int, props: Sequence[str],
                   actions: Sequence[str], fragment: FragmentSpec = FragmentSpec(), denominator: int = 10):
    """A random formula of depth <= ``depth`` using only constructors ``fragment`` allows."""
    def const():
        return Const(random_value(L, rng, denominator))

    def prog(d):
        choices = ["atom"] * 3
        if d > 0:
            choices += ["seq", "star"]
            if fragment.allows(Constructor.UNION):
                choices.append("union")
            if fragment.allows(Constructor.TEST):
                choices.append("test")
        kind = rng.choice(choices)
        if kind == "atom":
            return Atomic(rng.choice(actions))
        if kind == "seq":
            return Compose(prog(d - 1), prog(d - 1))
        if kind == "star":
            return Star(prog(d - 1))
        if kind == "union":
            return Union_(prog(d - 1), prog(d - 1))
        return Test(form(d - 1))

    def form(d):
        if d <= 0 or rng.random() < 0.2:
            return const() if rng.random() < 0.25 else Prop(rng.choice(props))
        kinds = ["and", "or", "not", "imp_from", "imp_to"]
        if actions:
            kinds += ["dia", "box", "dia", "box"]
        if fragment.allows(Constructor.IMPLIES):
            kinds.append("imp")
        kind = rng.choice(kinds)
        if kind == "and":
            return And(form(d - 1), form(d - 1))
        if kind == "or":
            return Or(form(d - 1), form(d - 1))
        if kind == "not":
            return Not(form(d - 1))
        if kind == "imp":
            # canonical form: a constant operand would make it a constant implication
            left, right = form(d - 1), form(d - 1)
            if isinstance(left, Const):
                left = Prop(rng.choice(props))
            if isinstance(right, Const):
                right = Prop(rng.choice(props))
            return Implies(left, right)
        if kind == "imp_from":
            return ImpliesFromConst(const().value, form(d - 1))
        if kind == "imp_to":
            return ImpliesToConst(form(d - 1), const().value)
        p = prog(min(d - 1, 1))
        return Diamond(p, form(d - 1)) if kind == "dia" else Box(p, form(d - 1))

    return form(depth)
