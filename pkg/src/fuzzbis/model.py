"""Finite fuzzy Kripke models and formula/program evaluation."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from .lattice import ResiduatedLattice, get_lattice
from .relation import DomainError, FuzzyRelation, compose, sup_relations
from .syntax import (And, Atomic, Box, Compose, Const, Diamond, Formula, Implies,
                     ImpliesFromConst, ImpliesToConst, Not, Or, Program, Prop, Star, Test,
                     Union_)


class ModelError(ValueError):
    """Malformed model document or reference to an unknown symbol."""


LATTICE_ENV = "FUZZBIS_LATTICE"


class KripkeModel:
    """A finite fuzzy Kripke model.

    ``props`` maps a proposition to a tuple of values aligned with ``states``;
    ``actions`` maps an action to a square :class:`FuzzyRelation` on ``states``.
    Symbols absent from a model evaluate to 0 everywhere when ``strict`` is off.
    """

    def __init__(self, lattice: ResiduatedLattice, states: Sequence, props: Mapping[str, Sequence] | None = None,
                 actions: Mapping[str, FuzzyRelation] | None = None):
        self.lattice = lattice
        self.states = tuple(states)
        if not self.states:
            raise ModelError("a model needs at least one state")
        if len(set(self.states)) != len(self.states):
            raise ModelError("duplicate state names")
        self.index = {s: i for i, s in enumerate(self.states)}
        self.props = {}
        for name, vals in (props or {}).items():
            vals = tuple(vals)
            if len(vals) != len(self.states):
                raise ModelError(f"proposition {name!r} needs one value per state")
            for v in vals:
                lattice.check(v)
            self.props[name] = vals
        self.actions = {}
        for name, rel in (actions or {}).items():
            if rel.rows != self.states or rel.cols != self.states:
                raise ModelError(f"action {name!r} is not a relation on the model's states")
            if rel.lattice.name != lattice.name:
                raise ModelError(f"action {name!r} uses lattice {rel.lattice.name}")
            self.actions[name] = rel
        self._prog_cache: dict = {}
        self._form_cache: dict = {}

    @property
    def size(self) -> int:
        return len(self.states)

    def prop(self, name: str) -> tuple:
        try:
            return self.props[name]
        except KeyError:
            return tuple(self.lattice.bottom for _ in self.states)

    def action(self, name: str) -> FuzzyRelation:
        try:
            return self.actions[name]
        except KeyError:
            return FuzzyRelation.zeros(self.lattice, self.states, self.states)

    def with_lattice(self, lattice: ResiduatedLattice) -> "KripkeModel":
        """Same tables reinterpreted over another lattice with a compatible carrier."""
        props = {p: tuple(lattice.check(v) for v in vals) for p, vals in self.props.items()}
        acts = {a: FuzzyRelation(lattice, r.rows, r.cols, r.table) for a, r in self.actions.items()}
        return KripkeModel(lattice, self.states, props, acts)

    def to_json(self, decimal: int | None = None) -> dict:
        fmt = self.lattice.format
        bot = self.lattice.bottom
        return {
            "lattice": self.lattice.name,
            "states": list(self.states),
            "props": {p: {s: fmt(v, decimal) for s, v in zip(self.states, vals) if v != bot}
                      for p, vals in self.props.items()},
            "actions": {a: [[x, y, fmt(v, decimal)] for x, y, v in r.entries()]
                        for a, r in self.actions.items()},
        }

    def __repr__(self):
        return f"KripkeModel({self.lattice.name}, states={list(self.states)})"


def resolve_lattice(doc_lattice: str | None, override: str | None = None) -> ResiduatedLattice:
    """``override`` beats ``$FUZZBIS_LATTICE``, which beats the document, which defaults to godel."""
    name = override or os.environ.get(LATTICE_ENV) or doc_lattice or "godel"
    return get_lattice(name)


MODEL_KEYS = {"lattice", "states", "props", "actions", "name", "description"}


def model_from_json(doc: Mapping[str, Any], lattice: ResiduatedLattice | str | None = None) -> KripkeModel:
    if not isinstance(doc, Mapping):
        raise ModelError("model document must be a JSON object")
    extra = set(doc) - MODEL_KEYS
    if extra:
        raise ModelError(f"unknown model keys: {', '.join(sorted(extra))}")
    if isinstance(lattice, ResiduatedLattice):
        L = lattice
    else:
        L = resolve_lattice(doc.get("lattice"), lattice)
    states = doc.get("states")
    if not isinstance(states, list) or not states:
        raise ModelError("model document needs a non-empty 'states' list")
    states = [str(s) for s in states]
    known = set(states)
    props = {}
    try:
        for p, mapping in (doc.get("props") or {}).items():
            for s in mapping:
                if s not in known:
                    raise ModelError(f"proposition {p!r} mentions undeclared state {s!r}")
            props[p] = tuple(L.parse(mapping[s]) if s in mapping else L.bottom for s in states)
        actions = {}
        for a, entries in (doc.get("actions") or {}).items():
            for e in entries:
                if len(e) != 3:
                    raise ModelError(f"action {a!r} entry must be [from, to, value]: {e!r}")
                if e[0] not in known or e[1] not in known:
                    raise ModelError(f"action {a!r} mentions undeclared state in {e!r}")
            actions[a] = FuzzyRelation.from_entries(L, states, states, entries)
    except DomainError as exc:
        raise ModelError(str(exc)) from None
    except ValueError as exc:
        if isinstance(exc, ModelError):
            raise
        raise ModelError(str(exc)) from None
    return KripkeModel(L, states, props, actions)


def load_model(path: str | os.PathLike, lattice: str | None = None) -> KripkeModel:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: invalid JSON ({exc})") from None
    return model_from_json(doc, lattice)


# -- evaluation --------------------------------------------------------------

def _diag(L, values) -> list[list]:
    n = len(values)
    return [[values[i] if i == j else L.bottom for j in range(n)] for i in range(n)]


def star_closure(R: FuzzyRelation) -> FuzzyRelation:
    """Reflexive-transitive sup-(x) closure.

    Extending a path never raises its value (x (x) y <= x), so simple paths of
    length < n suffice and the loop below stops after at most n rounds.
    """
    closure = FuzzyRelation.identity(R.lattice, R.rows)
    for _ in range(len(R.rows)):
        nxt = sup_relations([closure, compose(closure, R)])
        if nxt == closure:
            break
        closure = nxt
    return closure


def eval_program(M: KripkeModel, alpha: Program, strict: bool = True) -> FuzzyRelation:
    cached = M._prog_cache.get((alpha, strict))
    if cached is not None:
        return cached
    L = M.lattice
    if isinstance(alpha, Atomic):
        if strict and alpha.name not in M.actions:
            raise ModelError(f"unknown action {alpha.name!r}")
        out = M.action(alpha.name)
    elif isinstance(alpha, Test):
        vals = eval_formula_vector(M, alpha.formula, strict)
        out = FuzzyRelation(L, M.states, M.states, _diag(L, vals))
    elif isinstance(alpha, Union_):
        out = sup_relations([eval_program(M, alpha.left, strict), eval_program(M, alpha.right, strict)])
    elif isinstance(alpha, Compose):
        out = compose(eval_program(M, alpha.left, strict), eval_program(M, alpha.right, strict))
    elif isinstance(alpha, Star):
        out = star_closure(eval_program(M, alpha.body, strict))
    else:
        raise TypeError(f"not a program: {alpha!r}")
    M._prog_cache[(alpha, strict)] = out
    return out


def eval_formula_vector(M: KripkeModel, phi: Formula, strict: bool = True) -> tuple:
    """Values of ``phi`` at every state, aligned with ``M.states``."""
    cached = M._form_cache.get((phi, strict))
    if cached is not None:
        return cached
    L = M.lattice
    n = M.size
    if isinstance(phi, Const):
        out = tuple(L.check(phi.value) for _ in range(n))
    elif isinstance(phi, Prop):
        if strict and phi.name not in M.props:
            raise ModelError(f"unknown proposition {phi.name!r}")
        out = M.prop(phi.name)
    elif isinstance(phi, And):
        a, b = eval_formula_vector(M, phi.left, strict), eval_formula_vector(M, phi.right, strict)
        out = tuple(map(L.meet, a, b))
    elif isinstance(phi, Or):
        a, b = eval_formula_vector(M, phi.left, strict), eval_formula_vector(M, phi.right, strict)
        out = tuple(map(L.join, a, b))
    elif isinstance(phi, Implies):
        a, b = eval_formula_vector(M, phi.left, strict), eval_formula_vector(M, phi.right, strict)
        out = tuple(map(L.residuum, a, b))
    elif isinstance(phi, ImpliesFromConst):
        c = L.check(phi.const)
        out = tuple(L.residuum(c, v) for v in eval_formula_vector(M, phi.body, strict))
    elif isinstance(phi, ImpliesToConst):
        c = L.check(phi.const)
        out = tuple(L.residuum(v, c) for v in eval_formula_vector(M, phi.body, strict))
    elif isinstance(phi, Not):
        out = tuple(L.residuum(v, L.bottom) for v in eval_formula_vector(M, phi.body, strict))
    elif isinstance(phi, Diamond):
        R = eval_program(M, phi.program, strict).table
        body = eval_formula_vector(M, phi.body, strict)
        out = tuple(L.sup(L.tnorm(r, v) for r, v in zip(row, body)) for row in R)
    elif isinstance(phi, Box):
        R = eval_program(M, phi.program, strict).table
        body = eval_formula_vector(M, phi.body, strict)
        out = tuple(L.inf(L.residuum(r, v) for r, v in zip(row, body)) for row in R)
    else:
        raise TypeError(f"not a formula: {phi!r}")
    M._form_cache[(phi, strict)] = out
    return out


def eval_formula(M: KripkeModel, phi: Formula, x, strict: bool = True):
    if x not in M.index:
        raise ModelError(f"unknown state {x!r}")
    return eval_formula_vector(M, phi, strict)[M.index[x]]


@dataclass
class ModelStats:
    states: int
    edges: int
    props: int
    actions: int
    image_finite: bool = True
    witnessed: bool = True
    per_action_edges: dict = field(default_factory=dict)


def model_stats(M: KripkeModel) -> ModelStats:
    """Counts of states and non-zero action edges.

    Finite models are always image-finite and witnessed; the flags are
    reported as such rather than recomputed.
    """
    per = {a: sum(1 for _ in r.entries()) for a, r in M.actions.items()}
    return ModelStats(M.size, sum(per.values()), len(M.props), len(M.actions), per_action_edges=per)
