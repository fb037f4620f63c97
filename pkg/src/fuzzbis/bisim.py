"""Fuzzy bisimulations between finite Kripke models.

Three things live here: a direct checker for the zig-zag definition, a checker
for the equivalent relational inequalities, and a greatest-fixpoint solver.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .lattice import ResiduatedLattice
from .model import KripkeModel
from .relation import (DomainError, FuzzyRelation, compose, converse, leq_relations,
                       sup_relations)


class SolverError(ValueError):
    """The solver cannot run on this input (e.g. non-linear lattice)."""


@dataclass(frozen=True)
class Violation:
    condition: str
    states: tuple
    lhs: object
    rhs: object
    symbol: str | None = None

    def to_json(self, L: ResiduatedLattice, decimal: int | None = None) -> dict:
        out = {"condition": self.condition, "states": list(self.states),
               "lhs": L.format(self.lhs, decimal), "rhs": L.format(self.rhs, decimal)}
        if self.symbol is not None:
            out["symbol"] = self.symbol
        return out


@dataclass
class BisimReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return not self.violations

    def by_condition(self, condition: str) -> list[Violation]:
        return [v for v in self.violations if v.condition == condition]

    def to_json(self, L: ResiduatedLattice, decimal: int | None = None) -> dict:
        return {"holds": self.holds, "violations": [v.to_json(L, decimal) for v in self.violations]}


@dataclass(frozen=True)
class SolverConfig:
    """``mode`` is ``exact``, ``approximate`` or ``auto`` (approximate only for product)."""

    tolerance: Fraction = Fraction(1, 10**9)
    max_iterations: int = 10_000
    mode: str = "auto"

    def __post_init__(self):
        if self.mode not in ("exact", "approximate", "auto"):
            raise ValueError(f"unknown solver mode {self.mode!r}")
        if self.tolerance < 0:
            raise ValueError("tolerance must be non-negative")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")

    def resolve(self, L: ResiduatedLattice) -> str:
        terminates = L.is_finite or L.tnorm_kind in ("godel", "lukasiewicz")
        if self.mode == "auto":
            return "exact" if terminates else "approximate"
        if self.mode == "exact" and not terminates:
            raise SolverError(f"exact mode is not guaranteed to terminate on lattice {L.name}; "
                              "use approximate mode")
        return self.mode


@dataclass
class BisimResult:
    """``exact``: an exact fixpoint was reached from the harmony bound, so the
    relation is the greatest bisimulation. ``certified``: the relation is an
    exact fixpoint, hence a bisimulation (after snapping near-zero entries it
    may sit below the greatest one by at most the tolerance)."""

    relation: FuzzyRelation
    iterations: int
    converged: bool
    exact: bool
    mode: str
    trace: list[tuple[int, Fraction]] = field(default_factory=list)
    certified: bool = False

    def trace_csv(self) -> str:
        lines = ["iteration,delta"]
        lines += [f"{k},{_fmt_delta(d)}" for k, d in self.trace]
        return "\n".join(lines) + "\n"


@dataclass
class FixpointRun:
    table: list
    iterations: int
    converged: bool
    exact: bool
    certified: bool
    mode: str
    trace: list


def _fmt_delta(d: Fraction) -> str:
    return str(d.numerator) if d.denominator == 1 else f"{d.numerator}/{d.denominator}"


def _check_pair(M: KripkeModel, N: KripkeModel, Z: FuzzyRelation | None = None) -> ResiduatedLattice:
    if M.lattice.name != N.lattice.name:
        raise DomainError(f"models use different lattices ({M.lattice.name}, {N.lattice.name})")
    if Z is not None:
        if Z.rows != M.states or Z.cols != N.states:
            raise DomainError("relation domains do not match the two models")
        if Z.lattice.name != M.lattice.name:
            raise DomainError("relation lattice does not match the models")
    return M.lattice


def signature(M: KripkeModel, N: KripkeModel) -> tuple[list[str], list[str]]:
    """Union of proposition and action names; missing symbols are all-zero."""
    props = sorted(set(M.props) | set(N.props))
    actions = sorted(set(M.actions) | set(N.actions))
    return props, actions


def check_bisimulation(M: KripkeModel, N: KripkeModel, Z: FuzzyRelation, limit: int | None = None) -> BisimReport:
    """Check the harmony condition (FB1) and both zig-zag conditions (FB2, FB3)."""
    L = _check_pair(M, N, Z)
    props, actions = signature(M, N)
    T = Z.table
    n, m = M.size, N.size
    report = BisimReport()

    def add(v):
        report.violations.append(v)
        return limit is not None and len(report.violations) >= limit

    for p in props:
        pm, pn = M.prop(p), N.prop(p)
        for i in range(n):
            for j in range(m):
                rhs = L.biresiduum(pm[i], pn[j])
                if not L.leq(T[i][j], rhs):
                    if add(Violation("FB1", (M.states[i], N.states[j]), T[i][j], rhs, p)):
                        return report
    for a in actions:
        RM, RN = M.action(a).table, N.action(a).table
        for i in range(n):
            for j in range(m):
                z = T[i][j]
                if z == L.bottom:
                    continue
                for k in range(n):
                    lhs = L.tnorm(z, RM[i][k])
                    cands = [L.tnorm(RN[j][l], T[k][l]) for l in range(m)]
                    if not any(L.leq(lhs, c) for c in cands):
                        if add(Violation("FB2", (M.states[i], N.states[j], M.states[k]), lhs, L.sup(cands), a)):
                            return report
                for l in range(m):
                    lhs = L.tnorm(z, RN[j][l])
                    cands = [L.tnorm(RM[i][k], T[k][l]) for k in range(n)]
                    if not any(L.leq(lhs, c) for c in cands):
                        if add(Violation("FB3", (M.states[i], N.states[j], N.states[l]), lhs, L.sup(cands), a)):
                            return report
    return report


def harmony_bound(M: KripkeModel, N: KripkeModel) -> FuzzyRelation:
    """``inf_p (p^M(x) <-> p^N(x'))`` for every pair, the tightest harmony bound."""
    L = _check_pair(M, N)
    props, _ = signature(M, N)
    table = [[L.inf(L.biresiduum(M.prop(p)[i], N.prop(p)[j]) for p in props)
              for j in range(N.size)] for i in range(M.size)]
    return FuzzyRelation(L, M.states, N.states, table)


def _leq_report(report: BisimReport, cond: str, A: FuzzyRelation, B: FuzzyRelation, symbol=None):
    L = A.lattice
    for i, r in enumerate(A.rows):
        for j, c in enumerate(A.cols):
            if not L.leq(A.table[i][j], B.table[i][j]):
                report.violations.append(Violation(cond, (r, c), A.table[i][j], B.table[i][j], symbol))


def check_relational(M: KripkeModel, N: KripkeModel, Z: FuzzyRelation) -> BisimReport:
    """Check the relational form: E1 harmony bound, E2 ``Z^- o r^M <= r^N o Z^-``,
    E3 ``Z o r^N <= r^M o Z``."""
    _check_pair(M, N, Z)
    _, actions = signature(M, N)
    report = BisimReport()
    _leq_report(report, "E1", Z, harmony_bound(M, N))
    Zc = converse(Z)
    for a in actions:
        RM, RN = M.action(a), N.action(a)
        _leq_report(report, "E2", compose(Zc, RM), compose(RN, Zc), a)
        _leq_report(report, "E3", compose(Z, RN), compose(RM, Z), a)
    return report


def refine_step(L: ResiduatedLattice, Z: list[list], pairs: Sequence[tuple[list, list]]) -> list[list]:
    """One antitone refinement step of the relational conditions.

    ``pairs`` holds ``(RM, RN)`` transition tables, one per action.
    """
    n, m = len(Z), len(Z[0]) if Z else 0
    res, tn, meet, sup = L.residuum, L.tnorm, L.meet, L.sup
    bot = L.bottom
    out = [row[:] for row in Z]
    for RM, RN in pairs:
        # forward[k][j] = sup_l RN[j][l] (x) Z[k][l]; backward[i][l] = sup_k RM[i][k] (x) Z[k][l]
        forward = [[sup(tn(RN[j][l], Z[k][l]) for l in range(m)) for j in range(m)] for k in range(n)]
        backward = [[sup(tn(RM[i][k], Z[k][l]) for k in range(n)) for l in range(m)] for i in range(n)]
        for i in range(n):
            rowM = RM[i]
            for j in range(m):
                z = out[i][j]
                if z == bot:
                    continue
                for k in range(n):
                    if rowM[k] != bot:
                        z = meet(z, res(rowM[k], forward[k][j]))
                rowN = RN[j]
                for l in range(m):
                    if rowN[l] != bot:
                        z = meet(z, res(rowN[l], backward[i][l]))
                out[i][j] = z
    return out


def _delta(L, A, B) -> Fraction:
    return max((L.distance(a, b) for ra, rb in zip(A, B) for a, b in zip(ra, rb)), default=Fraction(0))


def greatest_fixpoint(L: ResiduatedLattice, start: list[list], pairs, cfg: SolverConfig,
                      step=refine_step) -> FixpointRun:
    """Iterate ``step`` from ``start`` until stable (or close enough).

    In approximate mode, entries at or below the tolerance are snapped to 0
    once the deltas are small, and iteration continues; typical product-logic
    residue is a geometric decay towards 0 that never stabilises exactly.
    """
    mode = cfg.resolve(L)
    Z = [row[:] for row in start]
    trace = []
    for k in range(1, cfg.max_iterations + 1):
        nxt = step(L, Z, pairs)
        delta = _delta(L, Z, nxt)
        trace.append((k, delta))
        Z = nxt
        if delta == 0:
            return FixpointRun(Z, k, True, True, True, mode, trace)
        if mode == "approximate" and delta <= cfg.tolerance:
            return _snap(L, Z, pairs, cfg, step, k, trace, mode)
    return FixpointRun(Z, cfg.max_iterations, False, False, False, mode, trace)


def _snap(L, Z, pairs, cfg, step, k, trace, mode) -> FixpointRun:
    tol = cfg.tolerance
    # geometric tail: with ratio rho the entries can still fall by delta * rho / (1 - rho)
    delta = trace[-1][1]
    rho = trace[-1][1] / trace[-2][1] if len(trace) > 1 and trace[-2][1] else Fraction(1, 2)
    rho = min(rho, Fraction(99, 100))
    threshold = tol + delta * rho / (1 - rho)
    W = [[L.bottom if isinstance(v, Fraction) and v <= threshold else v for v in row] for row in Z]
    budget = max(4 * len(Z) * (len(Z[0]) if Z else 0), 16)
    for extra in range(1, budget + 1):
        nxt = step(L, W, pairs)
        if nxt == W:
            return FixpointRun(W, k, True, False, True, mode, trace)
        if _delta(L, Z, nxt) > threshold:
            break
        W = nxt
    return FixpointRun(Z, k, True, False, False, mode, trace)


def greatest_bisimulation(M: KripkeModel, N: KripkeModel, cfg: SolverConfig | None = None) -> BisimResult:
    """Greatest fuzzy bisimulation between two finite models over a linear lattice."""
    cfg = cfg or SolverConfig()
    L = _check_pair(M, N)
    if not L.is_linear:
        raise SolverError(f"lattice {L.name} is not linear; the relational conditions only "
                          "characterise bisimulations on linear lattices")
    _, actions = signature(M, N)
    start = [list(r) for r in harmony_bound(M, N).table]
    pairs = [(M.action(a).table, N.action(a).table) for a in actions]
    run = greatest_fixpoint(L, start, pairs, cfg)
    return BisimResult(FuzzyRelation(L, M.states, N.states, run.table), run.iterations, run.converged,
                       run.exact, run.mode, run.trace, run.certified)


def bisimulation_below(M: KripkeModel, N: KripkeModel, R: FuzzyRelation,
                       cfg: SolverConfig | None = None) -> BisimResult:
    """Greatest bisimulation contained in ``R`` (refinement started from R meet the harmony bound)."""
    cfg = cfg or SolverConfig()
    L = _check_pair(M, N, R)
    if not L.is_linear:
        raise SolverError(f"lattice {L.name} is not linear")
    _, actions = signature(M, N)
    H = harmony_bound(M, N).table
    start = [[L.meet(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(R.table, H)]
    pairs = [(M.action(a).table, N.action(a).table) for a in actions]
    run = greatest_fixpoint(L, start, pairs, cfg)
    return BisimResult(FuzzyRelation(L, M.states, N.states, run.table), run.iterations, run.converged,
                       run.exact, run.mode, run.trace, run.certified)


@dataclass
class ClosureReport:
    checks: dict[str, bool]

    @property
    def holds(self) -> bool:
        return all(self.checks.values())


def closure_check(M: KripkeModel, N: KripkeModel, P: KripkeModel, Z1: FuzzyRelation,
                  Z2: FuzzyRelation, family: Iterable[FuzzyRelation] = ()) -> ClosureReport:
    """Closure of bisimulations under converse, composition and finite sups.

    ``Z1`` relates M to N, ``Z2`` relates N to P; ``family`` are further
    bisimulations between M and N whose sup (with ``Z1``) is checked on linear
    lattices.
    """
    L = _check_pair(M, N, Z1)
    _check_pair(N, P, Z2)
    checks = {
        "identity": check_bisimulation(M, M, FuzzyRelation.identity(L, M.states)).holds,
        "converse": check_bisimulation(N, M, converse(Z1)).holds,
        "compose": check_bisimulation(M, P, compose(Z1, Z2)).holds,
    }
    if L.is_linear:
        checks["sup"] = check_bisimulation(M, N, sup_relations([Z1, *family])).holds
    return ClosureReport(checks)


def dominates(Z: FuzzyRelation, candidate: FuzzyRelation) -> bool:
    """True iff ``candidate <= Z`` pointwise."""
    return leq_relations(candidate, Z)
