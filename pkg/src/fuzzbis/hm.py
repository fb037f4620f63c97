"""Logical distance, Hennessy-Milner checks and invariance harnesses.

The logical distance between ``x`` and ``x'`` is the infimum, over formulas of
the diamond-only fragment fKz, of ``phi(x) <-> phi(x')``. Here it is computed
over a finite budget: formulas of bounded depth whose constants come from a
finite pool.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .bisim import (BisimReport, BisimResult, SolverConfig, Violation, check_bisimulation,
                    greatest_bisimulation, signature)
from .lattice import HEYTING_LAWS, ResiduatedLattice, check_laws, random_tuples
from .model import KripkeModel, eval_formula_vector, eval_program
from .relation import DomainError, FuzzyRelation
from .syntax import (And, Atomic, Compose, Const, Constructor, Diamond, FragmentSpec, ImpliesFromConst,
                     ImpliesToConst, Prop, Star, Test, Union_, in_fragment, is_fKz, smallest_fragment,
                     subterms, to_text)


PROGRAM_TYPES = (Atomic, Test, Union_, Compose, Star)


class GatingError(ValueError):
    """The lattice does not meet the precondition for the requested fragment."""

    def __init__(self, condition: str, message: str):
        super().__init__(f"[{condition}] {message}")
        self.condition = condition


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class EnumerationBudget:
    max_depth: int
    constant_pool: tuple

    def __post_init__(self):
        if self.max_depth < 0:
            raise ValueError("max_depth must be non-negative")


def model_values(models: Iterable[KripkeModel]) -> set:
    vals = set()
    for M in models:
        for v in M.props.values():
            vals.update(v)
        for r in M.actions.values():
            for row in r.table:
                vals.update(row)
    return vals


def sort_values(L: ResiduatedLattice, values: Iterable) -> list:
    vals = list(set(values))
    try:
        return sorted(vals)
    except TypeError:
        order = {e: i for i, e in enumerate(L.elements())} if L.is_finite else {}
        return sorted(vals, key=lambda v: order.get(v, 0))


def default_constant_pool(L: ResiduatedLattice, models: Sequence[KripkeModel], rounds: int = 2,
                          max_size: int = 5000) -> tuple:
    """``{0, 1}`` plus every model value, closed ``rounds`` times under
    residuum, biresiduum, meet and join."""
    pool = {L.bottom, L.top} | model_values(models)
    for _ in range(rounds):
        cur = list(pool)
        new = set(pool)
        for a, b in itertools.product(cur, repeat=2):
            new.update((L.residuum(a, b), L.biresiduum(a, b), L.meet(a, b), L.join(a, b)))
            if len(new) > max_size:
                raise ValueError(f"constant pool exceeds {max_size} values; lower the closure rounds")
        if new == pool:
            break
        pool = new
    return tuple(sort_values(L, pool))


def make_budget(M: KripkeModel, N: KripkeModel, max_depth: int, rounds: int = 2) -> EnumerationBudget:
    return EnumerationBudget(max_depth, default_constant_pool(M.lattice, [M, N], rounds))


# -- structural enumeration --------------------------------------------------

def enumerate_fKz(budget: EnumerationBudget, props: Sequence[str], actions: Sequence[str]) -> Iterator:
    """Every fKz formula of depth <= max_depth, each exactly once, by depth."""
    last = [Const(a) for a in budget.constant_pool] + [Prop(p) for p in props]
    yield from last
    below: list = []
    for _ in range(budget.max_depth):
        upto = below + last
        n_below = len(below)
        layer = []
        # conjunctions with at least one operand from the newest layer
        for i, phi in enumerate(upto):
            for j, psi in enumerate(upto):
                if i >= n_below or j >= n_below:
                    layer.append(And(phi, psi))
        for a in budget.constant_pool:
            layer.extend(ImpliesFromConst(a, phi) for phi in last)
        for a in budget.constant_pool:
            layer.extend(ImpliesToConst(phi, a) for phi in last)
        for r in actions:
            layer.extend(Diamond(Atomic(r), phi) for phi in last)
        yield from layer
        below, last = upto, layer


# -- logical distance --------------------------------------------------------

@dataclass
class DistanceMatrix:
    lattice: ResiduatedLattice
    rows: tuple
    cols: tuple
    values: list
    witnesses: list
    depth: int
    classes: int = 0
    history: list = field(default_factory=list)

    def relation(self) -> FuzzyRelation:
        return FuzzyRelation(self.lattice, self.rows, self.cols, self.values)

    def __call__(self, x, y):
        return self.values[self.rows.index(x)][self.cols.index(y)]

    def witness(self, x, y):
        return self.witnesses[self.rows.index(x)][self.cols.index(y)]


def _require_continuous(L: ResiduatedLattice):
    if not L.is_continuous:
        raise GatingError("continuity", f"t-norm of lattice {L.name} is not continuous w.r.t. infima")


def _bires_table(L, vm, vn):
    return [[L.biresiduum(a, b) for b in vn] for a in vm]


class _Tracker:
    def __init__(self, L, rows, cols):
        self.L = L
        self.values = [[L.top] * len(cols) for _ in rows]
        self.witnesses = [[Const(L.top)] * len(cols) for _ in rows]

    def offer(self, vec, phi):
        L = self.L
        vm, vn = vec
        for i, a in enumerate(vm):
            row, wrow = self.values[i], self.witnesses[i]
            for j, b in enumerate(vn):
                d = L.biresiduum(a, b)
                if d != row[j] and L.leq(d, row[j]):
                    row[j] = d
                    wrow[j] = phi
                elif not L.leq(row[j], d):
                    # non-linear carriers: keep the meet, witness is then partial
                    row[j] = L.meet(row[j], d)
                    wrow[j] = phi

    def snapshot(self):
        return [r[:] for r in self.values], [r[:] for r in self.witnesses]


def _diamond_vec(L, RM, RN, vec):
    vm, vn = vec
    dm = tuple(L.sup(L.tnorm(r, v) for r, v in zip(row, vm)) for row in RM)
    dn = tuple(L.sup(L.tnorm(r, v) for r, v in zip(row, vn)) for row in RN)
    return dm, dn


def logical_distance(M: KripkeModel, N: KripkeModel, budget: EnumerationBudget) -> DistanceMatrix:
    """Infimum of biresidua over the budgeted fKz formulas.

    Formulas are grouped by their value vector on both models, which is exact
    because every fKz constructor acts on value vectors. At the last depth only
    diamonds are added: a conjunction or constant implication never has a
    smaller biresiduum than its operands.
    """
    L = M.lattice
    if L.name != N.lattice.name:
        raise DomainError("models use different lattices")
    _require_continuous(L)
    props, actions = signature(M, N)
    trans = [(M.action(a).table, N.action(a).table, a) for a in actions]
    tracker = _Tracker(L, M.states, N.states)
    classes: dict = {}

    def add(vec, phi, bucket):
        if vec not in classes:
            classes[vec] = phi
            bucket.append(vec)
            tracker.offer(vec, phi)

    newest: list = []
    for a in budget.constant_pool:
        add((tuple([a] * M.size), tuple([a] * N.size)), Const(a), newest)
    for p in props:
        add((M.prop(p), N.prop(p)), Prop(p), newest)
    history = [tracker.snapshot()]
    older: list = []
    for d in range(1, budget.max_depth + 1):
        layer: list = []
        for RM, RN, a in trans:
            for vec in newest:
                add(_diamond_vec(L, RM, RN, vec), Diamond(Atomic(a), classes[vec]), layer)
        if d < budget.max_depth:
            pool = budget.constant_pool
            for vec in newest:
                phi = classes[vec]
                vm, vn = vec
                for c in pool:
                    add((tuple(L.residuum(c, v) for v in vm), tuple(L.residuum(c, v) for v in vn)),
                        ImpliesFromConst(c, phi), layer)
                    add((tuple(L.residuum(v, c) for v in vm), tuple(L.residuum(v, c) for v in vn)),
                        ImpliesToConst(phi, c), layer)
            everything = older + newest
            n_old = len(older)
            for i, u in enumerate(everything):
                start = max(i, n_old)
                for w in everything[start:]:
                    vec = (tuple(map(L.meet, u[0], w[0])), tuple(map(L.meet, u[1], w[1])))
                    add(vec, And(classes[u], classes[w]), layer)
            older = everything
        newest = layer
        history.append(tracker.snapshot())
    values, witnesses = tracker.snapshot()
    return DistanceMatrix(L, M.states, N.states, values, witnesses, budget.max_depth,
                          len(classes), history)


def logical_distance_bruteforce(M: KripkeModel, N: KripkeModel, budget: EnumerationBudget) -> FuzzyRelation:
    """Reference computation: evaluate every enumerated formula on both models."""
    L = M.lattice
    _require_continuous(L)
    props, actions = signature(M, N)
    values = [[L.top] * N.size for _ in M.states]
    for phi in enumerate_fKz(budget, props, actions):
        vm = eval_formula_vector(M, phi, strict=False)
        vn = eval_formula_vector(N, phi, strict=False)
        for i, a in enumerate(vm):
            for j, b in enumerate(vn):
                values[i][j] = L.meet(values[i][j], L.biresiduum(a, b))
    M._form_cache.clear()
    N._form_cache.clear()
    return FuzzyRelation(L, M.states, N.states, values)


# -- Hennessy-Milner ---------------------------------------------------------

@dataclass
class HMReport:
    solver: BisimResult
    distance: DistanceMatrix
    sound_by_depth: list[bool]
    matched: bool
    gaps: list
    tolerance: Fraction

    @property
    def sound(self) -> bool:
        return all(self.sound_by_depth)

    @property
    def holds(self) -> bool:
        return self.sound

    def to_json(self, decimal: int | None = None) -> dict:
        L = self.distance.lattice
        Z = self.solver.relation
        pairs = []
        for i, x in enumerate(Z.rows):
            for j, y in enumerate(Z.cols):
                pairs.append({
                    "x": x, "y": y,
                    "distance": L.format(self.distance.values[i][j], decimal),
                    "witness": to_text(self.distance.witnesses[i][j], L),
                    "solver": L.format(Z.table[i][j], decimal),
                    "gap": L.format(self.gaps[i][j], decimal) if isinstance(self.gaps[i][j], Fraction)
                    else str(self.gaps[i][j]),
                })
        return {"sound": self.sound, "matched": self.matched, "depth": self.distance.depth,
                "solver_exact": self.solver.exact, "sound_by_depth": self.sound_by_depth,
                "pairs": pairs}

    def depth_csv(self) -> str:
        L = self.distance.lattice
        Z = self.solver.relation.table
        lines = ["depth,max_gap,pairs_matched,pairs_total,sound"]
        for d, (vals, _) in enumerate(self.distance.history):
            gaps = [L.distance(v, z) for rv, rz in zip(vals, Z) for v, z in zip(rv, rz)]
            matched = sum(1 for g in gaps if g <= self.tolerance)
            mg = max(gaps, default=Fraction(0))
            lines.append(f"{d},{L.format(mg) if isinstance(mg, Fraction) else mg},{matched},{len(gaps)},"
                         f"{str(self.sound_by_depth[d]).lower()}")
        return "\n".join(lines) + "\n"


def _leq_tol(L, a, b, tol) -> bool:
    if L.leq(a, b):
        return True
    return tol > 0 and isinstance(a, Fraction) and a - b <= tol


def hm_check(M: KripkeModel, N: KripkeModel, budget: EnumerationBudget, cfg: SolverConfig | None = None) -> HMReport:
    """Compare the greatest bisimulation with the logical distance at every depth.

    Soundness (solver <= distance) must hold at every depth; a match at the
    maximal depth is evidence for the Hennessy-Milner property, not a proof.
    When the solver stopped on tolerance rather than on an exact fixpoint both
    comparisons allow that tolerance.
    """
    cfg = cfg or SolverConfig()
    res = greatest_bisimulation(M, N, cfg)
    dist = logical_distance(M, N, budget)
    L = M.lattice
    tol = Fraction(0) if res.exact else cfg.tolerance
    Z = res.relation.table
    sound = []
    for vals, _ in dist.history:
        sound.append(all(_leq_tol(L, z, v, tol) for rz, rv in zip(Z, vals) for z, v in zip(rz, rv)))
    gaps = [[L.distance(v, z) for v, z in zip(rv, rz)] for rv, rz in zip(dist.values, Z)]
    matched = all(g <= tol for row in gaps for g in row)
    return HMReport(res, dist, sound, matched, gaps, tol)


# -- invariance --------------------------------------------------------------

def heyting_laws_hold(L: ResiduatedLattice, samples: int = 3000, seed: int = 0) -> bool:
    """Whether the two Heyting-only laws hold (exhaustive on finite carriers, sampled otherwise)."""
    if L.is_heyting:
        return True
    if L.is_finite:
        tuples = itertools.product(L.elements(), repeat=5)
    else:
        tuples = random_tuples(random.Random(seed), samples)
    return not check_laws(L, tuples, HEYTING_LAWS, limit=1)


def gating_conditions(L: ResiduatedLattice, fragment: FragmentSpec, mode: str = "heyting") -> dict[str, bool]:
    """Lattice conditions invariance needs for ``fragment``.

    ``linearity``: required when union is allowed. ``heyting``: required when
    full implication or test is allowed; with ``mode="laws"`` it is replaced by
    the two Heyting-only laws.
    """
    out = {}
    if fragment.allows(Constructor.UNION):
        out["linearity"] = L.is_linear
    if fragment.allows(Constructor.IMPLIES) or fragment.allows(Constructor.TEST):
        out["heyting"] = L.is_heyting if mode == "heyting" else heyting_laws_hold(L)
    return out


@dataclass
class InvarianceReport:
    fragment: FragmentSpec
    gating: dict[str, bool]
    enforced: bool
    violations: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return not self.violations

    def to_json(self, L, decimal=None) -> dict:
        return {
            "holds": self.holds, "excluded": str(self.fragment), "gating": self.gating,
            "gating_enforced": self.enforced,
            "violations": [
                {"x": v["x"], "y": v["y"], "Z": L.format(v["Z"], decimal),
                 "biresiduum": L.format(v["biresiduum"], decimal),
                 "trace": [[t, L.format(a, decimal), L.format(b, decimal)] for t, a, b in v["trace"]]}
                for v in self.violations],
        }


def _gate(L, node, fragment, enforce, mode, fkz_exempt):
    if fragment is None:
        fragment = smallest_fragment(node)
    if not in_fragment(node, fragment):
        raise GatingError("fragment", f"{to_text(node, L)} uses a constructor excluded by {fragment}")
    gating = {} if fkz_exempt else gating_conditions(L, fragment, mode)
    if enforce:
        for cond, ok in gating.items():
            if not ok:
                need = ("a linear lattice (union is allowed)" if cond == "linearity"
                        else "a Heyting algebra (full implication or test is allowed)")
                raise GatingError(cond, f"fragment {fragment} needs {need}; lattice {L.name} is not")
    return fragment, gating


def invariance_check(M: KripkeModel, N: KripkeModel, Z: FuzzyRelation, phi, fragment: FragmentSpec | None = None,
                     enforce_gating: bool = True, gating_mode: str = "heyting") -> InvarianceReport:
    """Check ``Z(x, x') <= phi(x) <-> phi(x')`` for every pair."""
    L = M.lattice
    fragment, gating = _gate(L, phi, fragment, enforce_gating, gating_mode, is_fKz(phi))
    if not check_bisimulation(M, N, Z, limit=1).holds:
        raise PreconditionError("the supplied relation is not a fuzzy bisimulation")
    vm = eval_formula_vector(M, phi, strict=False)
    vn = eval_formula_vector(N, phi, strict=False)
    report = InvarianceReport(fragment, gating, enforce_gating)
    for i, x in enumerate(M.states):
        for j, y in enumerate(N.states):
            b = L.biresiduum(vm[i], vn[j])
            if not L.leq(Z.table[i][j], b):
                trace = []
                seen = set()
                for sub in subterms(phi):
                    if isinstance(sub, PROGRAM_TYPES) or sub in seen:
                        continue
                    seen.add(sub)
                    trace.append((to_text(sub, L), eval_formula_vector(M, sub, strict=False)[i],
                                  eval_formula_vector(N, sub, strict=False)[j]))
                report.violations.append({"x": x, "y": y, "Z": Z.table[i][j], "biresiduum": b, "trace": trace})
    return report


def program_zigzag_check(M: KripkeModel, N: KripkeModel, Z: FuzzyRelation, alpha,
                         fragment: FragmentSpec | None = None, enforce_gating: bool = True,
                         gating_mode: str = "heyting") -> BisimReport:
    """Forth/back conditions for a complex program, checked exhaustively."""
    L = M.lattice
    _gate(L, alpha, fragment, enforce_gating, gating_mode, False)
    if not check_bisimulation(M, N, Z, limit=1).holds:
        raise PreconditionError("the supplied relation is not a fuzzy bisimulation")
    AM = eval_program(M, alpha, strict=False).table
    AN = eval_program(N, alpha, strict=False).table
    T = Z.table
    n, m = M.size, N.size
    report = BisimReport()
    for i in range(n):
        for j in range(m):
            z = T[i][j]
            for k in range(n):
                lhs = L.tnorm(z, AM[i][k])
                cands = [L.tnorm(AN[j][l], T[k][l]) for l in range(m)]
                if not any(L.leq(lhs, c) for c in cands):
                    report.violations.append(Violation("forth", (M.states[i], N.states[j], M.states[k]),
                                                       lhs, L.sup(cands)))
            for l in range(m):
                lhs = L.tnorm(z, AN[j][l])
                cands = [L.tnorm(AM[i][k], T[k][l]) for k in range(n)]
                if not any(L.leq(lhs, c) for c in cands):
                    report.violations.append(Violation("back", (M.states[i], N.states[j], N.states[l]),
                                                       lhs, L.sup(cands)))
    return report
