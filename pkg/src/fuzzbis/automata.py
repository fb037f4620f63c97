"""Fuzzy automata, forward bisimulations and the Kripke-model correspondence."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from .bisim import (BisimReport, SolverConfig, Violation, _fmt_delta, check_bisimulation,
                    greatest_fixpoint, refine_step)
from .lattice import ResiduatedLattice
from .model import KripkeModel, resolve_lattice
from .relation import DomainError, FuzzyRelation, FuzzySet

INIT_NAME = "__init__"
FINAL_NAME = "__final__"


AUTOMATON_KEYS = {"lattice", "states", "alphabet", "initial", "terminal", "transitions", "name", "description"}


class AutomatonError(ValueError):
    pass


class FuzzyAutomaton:
    def __init__(self, lattice: ResiduatedLattice, states: Sequence, alphabet: Sequence[str],
                 transitions: Mapping[str, FuzzyRelation], initial: FuzzySet, terminal: FuzzySet):
        self.lattice = lattice
        self.states = tuple(states)
        if not self.states:
            raise AutomatonError("an automaton needs at least one state")
        if len(set(self.states)) != len(self.states):
            raise AutomatonError("duplicate state names")
        self.alphabet = tuple(alphabet)
        if len(set(self.alphabet)) != len(self.alphabet):
            raise AutomatonError("duplicate letters")
        for letter in transitions:
            if letter not in self.alphabet:
                raise AutomatonError(f"transition letter {letter!r} is not in the alphabet")
        self.transitions = {}
        for letter in self.alphabet:
            rel = transitions.get(letter) or FuzzyRelation.zeros(lattice, self.states, self.states)
            if rel.rows != self.states or rel.cols != self.states:
                raise AutomatonError(f"transitions for {letter!r} are not a relation on the states")
            if rel.lattice.name != lattice.name:
                raise AutomatonError(f"transitions for {letter!r} use lattice {rel.lattice.name}")
            self.transitions[letter] = rel
        for name, fs in (("initial", initial), ("terminal", terminal)):
            if fs.domain != self.states:
                raise AutomatonError(f"{name} set must range over the states")
            if fs.lattice.name != lattice.name:
                raise AutomatonError(f"{name} set uses lattice {fs.lattice.name}")
        self.initial = initial
        self.terminal = terminal

    @property
    def size(self):
        return len(self.states)

    def to_json(self, decimal=None) -> dict:
        fmt = self.lattice.format
        bot = self.lattice.bottom
        return {
            "lattice": self.lattice.name,
            "states": list(self.states),
            "alphabet": list(self.alphabet),
            "initial": {s: fmt(v, decimal) for s, v in zip(self.states, self.initial.values) if v != bot},
            "terminal": {s: fmt(v, decimal) for s, v in zip(self.states, self.terminal.values) if v != bot},
            "transitions": {a: [[x, y, fmt(v, decimal)] for x, y, v in r.entries()]
                            for a, r in self.transitions.items()},
        }

    def __repr__(self):
        return f"FuzzyAutomaton({self.lattice.name}, states={list(self.states)}, alphabet={list(self.alphabet)})"


def automaton_from_json(doc: Mapping[str, Any], lattice: ResiduatedLattice | str | None = None) -> FuzzyAutomaton:
    if not isinstance(doc, Mapping):
        raise AutomatonError("automaton document must be a JSON object")
    extra = set(doc) - AUTOMATON_KEYS
    if extra:
        raise AutomatonError(f"unknown automaton keys: {', '.join(sorted(extra))}")
    L = lattice if isinstance(lattice, ResiduatedLattice) else resolve_lattice(doc.get("lattice"), lattice)
    states = doc.get("states")
    if not isinstance(states, list) or not states:
        raise AutomatonError("automaton document needs a non-empty 'states' list")
    states = [str(s) for s in states]
    alphabet = [str(a) for a in doc.get("alphabet", [])]
    try:
        initial = FuzzySet.from_mapping(L, states, doc.get("initial") or {})
        terminal = FuzzySet.from_mapping(L, states, doc.get("terminal") or {})
        trans = {a: FuzzyRelation.from_entries(L, states, states, entries)
                 for a, entries in (doc.get("transitions") or {}).items()}
    except DomainError as exc:
        raise AutomatonError(str(exc)) from None
    except ValueError as exc:
        if isinstance(exc, AutomatonError):
            raise
        raise AutomatonError(str(exc)) from None
    return FuzzyAutomaton(L, states, alphabet, trans, initial, terminal)


def load_automaton(path: str | os.PathLike, lattice: str | None = None) -> FuzzyAutomaton:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise AutomatonError(f"{path}: invalid JSON ({exc})") from None
    return automaton_from_json(doc, lattice)


def _check_pair(A: FuzzyAutomaton, B: FuzzyAutomaton, Z: FuzzyRelation | None = None) -> ResiduatedLattice:
    if A.lattice.name != B.lattice.name:
        raise DomainError(f"automata use different lattices ({A.lattice.name}, {B.lattice.name})")
    if set(A.alphabet) != set(B.alphabet):
        raise DomainError("automata have different alphabets")
    if Z is not None and (Z.rows != A.states or Z.cols != B.states):
        raise DomainError("relation domains do not match the two automata")
    return A.lattice


# -- forward bisimulation ----------------------------------------------------

def check_forward_bisimulation(A: FuzzyAutomaton, B: FuzzyAutomaton, Z: FuzzyRelation,
                               skip_initial: bool = False) -> BisimReport:
    """Pointwise check of the six forward-bisimulation inequalities."""
    L = _check_pair(A, B, Z)
    T = Z.table
    n, m = A.size, B.size
    sA, sB = A.initial.values, B.initial.values
    tA, tB = A.terminal.values, B.terminal.values
    rep = BisimReport()
    add = rep.violations.append
    if not skip_initial:
        for i in range(n):
            rhs = L.sup(L.tnorm(sB[j], T[i][j]) for j in range(m))
            if not L.leq(sA[i], rhs):
                add(Violation("initial-AB", (A.states[i],), sA[i], rhs))
        for j in range(m):
            rhs = L.sup(L.tnorm(sA[i], T[i][j]) for i in range(n))
            if not L.leq(sB[j], rhs):
                add(Violation("initial-BA", (B.states[j],), sB[j], rhs))
    for letter in A.alphabet:
        dA, dB = A.transitions[letter].table, B.transitions[letter].table
        # (Z^- o dA)(b, a') <= (dB o Z^-)(b, a')
        for j in range(m):
            for k in range(n):
                lhs = L.sup(L.tnorm(T[i][j], dA[i][k]) for i in range(n))
                rhs = L.sup(L.tnorm(dB[j][l], T[k][l]) for l in range(m))
                if not L.leq(lhs, rhs):
                    add(Violation("transition-AB", (B.states[j], A.states[k]), lhs, rhs, letter))
        # (Z o dB)(a, b') <= (dA o Z)(a, b')
        for i in range(n):
            for l in range(m):
                lhs = L.sup(L.tnorm(T[i][j], dB[j][l]) for j in range(m))
                rhs = L.sup(L.tnorm(dA[i][k], T[k][l]) for k in range(n))
                if not L.leq(lhs, rhs):
                    add(Violation("transition-BA", (A.states[i], B.states[l]), lhs, rhs, letter))
    for j in range(m):
        lhs = L.sup(L.tnorm(T[i][j], tA[i]) for i in range(n))
        if not L.leq(lhs, tB[j]):
            add(Violation("terminal-AB", (B.states[j],), lhs, tB[j]))
    for i in range(n):
        lhs = L.sup(L.tnorm(T[i][j], tB[j]) for j in range(m))
        if not L.leq(lhs, tA[i]):
            add(Violation("terminal-BA", (A.states[i],), lhs, tA[i]))
    return rep


@dataclass
class ForwardBisimResult:
    relation: FuzzyRelation
    iterations: int
    converged: bool
    exact: bool
    certified: bool
    mode: str
    initial_ok: bool
    initial_violations: list = field(default_factory=list)
    trace: list = field(default_factory=list)

    @property
    def exists(self) -> bool:
        """Whether a forward bisimulation exists at all (the sigma pair holds)."""
        return self.initial_ok

    def trace_csv(self) -> str:
        return "iteration,delta\n" + "".join(f"{k},{_fmt_delta(d)}\n" for k, d in self.trace)


def greatest_forward_bisimulation(A: FuzzyAutomaton, B: FuzzyAutomaton,
                                  cfg: SolverConfig | None = None) -> ForwardBisimResult:
    """Greatest relation satisfying the transition and terminal conditions.

    The terminal pair is equivalent to ``Z(a, b) <= tau(a) <-> tau(b)``, which
    is the starting bound; the transition pair is the same antitone step as the
    Kripke solver. The initial pair is not antitone in Z, so it is only checked
    on the result: if it fails there, no forward bisimulation exists.
    """
    cfg = cfg or SolverConfig()
    L = _check_pair(A, B)
    tA, tB = A.terminal.values, B.terminal.values
    start = [[L.biresiduum(a, b) for b in tB] for a in tA]
    pairs = [(A.transitions[c].table, B.transitions[c].table) for c in A.alphabet]
    run = greatest_fixpoint(L, start, pairs, cfg, refine_step)
    Z = FuzzyRelation(L, A.states, B.states, run.table)
    full = check_forward_bisimulation(A, B, Z)
    init = [v for v in full.violations if v.condition.startswith("initial")]
    return ForwardBisimResult(Z, run.iterations, run.converged, run.exact, run.certified, run.mode,
                              not init, init, run.trace)


# -- correspondence with Kripke models ---------------------------------------

def reserved_names(A: FuzzyAutomaton) -> tuple[str, str]:
    """Names for the fresh initial and final states, suffixed until unused."""
    taken = set(A.states)

    def fresh(base):
        name, k = base, 1
        while name in taken:
            name = f"{base}{k}"
            k += 1
        taken.add(name)
        return name

    return fresh(INIT_NAME), fresh(FINAL_NAME)


def to_kripke(A: FuzzyAutomaton) -> KripkeModel:
    L = A.lattice
    si, sf = reserved_names(A)
    states = A.states + (si, sf)
    n = A.size
    props = {"i": [L.bottom] * n + [L.top, L.bottom], "f": [L.bottom] * (n + 1) + [L.top]}
    actions = {}
    for letter in A.alphabet:
        d = A.transitions[letter].table
        table = [list(d[i]) + [L.bottom, A.terminal.values[i]] for i in range(n)]
        table.append(list(A.initial.values) + [L.bottom, L.bottom])
        table.append([L.bottom] * (n + 2))
        actions[letter] = FuzzyRelation(L, states, states, table)
    return KripkeModel(L, states, props, actions)


def extend_relation(A: FuzzyAutomaton, B: FuzzyAutomaton, Z: FuzzyRelation) -> FuzzyRelation:
    """Z plus ``(s_i, s_i'): 1`` and ``(s_f, s_f'): 1`` on the corresponding models."""
    L = Z.lattice
    ai, af = reserved_names(A)
    bi, bf = reserved_names(B)
    m = B.size
    table = [list(r) + [L.bottom, L.bottom] for r in Z.table]
    table.append([L.bottom] * m + [L.top, L.bottom])
    table.append([L.bottom] * m + [L.bottom, L.top])
    return FuzzyRelation(L, A.states + (ai, af), B.states + (bi, bf), table)


@dataclass
class Direction:
    """``status`` is ``confirmed``, ``vacuous`` (premise false), ``violated`` or ``not covered``."""

    status: str
    premise: bool | None = None
    conclusion: bool | None = None
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.status != "violated"

    def to_json(self):
        return {"status": self.status, "premise": self.premise, "conclusion": self.conclusion,
                "reason": self.reason}


@dataclass
class CorrespondenceReport:
    kripke: BisimReport
    automata: BisimReport
    direction1: Direction
    direction2: Direction

    @property
    def holds(self) -> bool:
        return self.direction1.ok and self.direction2.ok

    def to_json(self, L, decimal=None):
        return {"holds": self.holds,
                "kripke_bisimulation": self.kripke.to_json(L, decimal),
                "automata_bisimulation": self.automata.to_json(L, decimal),
                "direction1": self.direction1.to_json(), "direction2": self.direction2.to_json()}


def _implication(premise: bool, conclusion: bool) -> Direction:
    if not premise:
        return Direction("vacuous", premise, conclusion)
    return Direction("confirmed" if conclusion else "violated", premise, conclusion)


def correspondence_check(A: FuzzyAutomaton, B: FuzzyAutomaton, Z: FuzzyRelation,
                         Z2: FuzzyRelation | None = None) -> CorrespondenceReport:
    """Run both checkers and test the two implications between them.

    Direction 1: Z2 a Kripke bisimulation implies Z a forward bisimulation.
    With an empty alphabet the models carry no trace of the initial and
    terminal sets, so that direction is reported as not covered. Direction 2
    (the converse) is only asserted on linear lattices and for the canonical Z2.
    """
    L = _check_pair(A, B, Z)
    M, N = to_kripke(A), to_kripke(B)
    canonical = extend_relation(A, B, Z)
    custom = Z2 is not None and Z2.table != canonical.table
    Z2 = Z2 if Z2 is not None else canonical
    krep = check_bisimulation(M, N, Z2)
    arep = check_forward_bisimulation(A, B, Z)
    if not A.alphabet:
        d1 = Direction("not covered", krep.holds, arep.holds, "empty alphabet")
    else:
        d1 = _implication(krep.holds, arep.holds)
    if custom:
        d2 = Direction("not covered", arep.holds, krep.holds, "Z2 is not the canonical extension of Z")
    elif not L.is_linear:
        d2 = Direction("not covered", arep.holds, krep.holds, "lattice is not linear")
    else:
        d2 = _implication(arep.holds, krep.holds)
    return CorrespondenceReport(krep, arep, d1, d2)
