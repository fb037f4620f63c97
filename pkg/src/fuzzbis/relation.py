"""Fuzzy sets and fuzzy relations over finite, ordered domains."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Hashable, Iterable, Mapping, Sequence

from .lattice import ResiduatedLattice


class DomainError(ValueError):
    """Domains or lattices of two operands do not match."""


def _same_lattice(a: ResiduatedLattice, b: ResiduatedLattice) -> None:
    if a is not b and a.name != b.name:
        raise DomainError(f"lattice mismatch: {a.name} vs {b.name}")


@dataclass(frozen=True)
class FuzzySet:
    lattice: ResiduatedLattice
    domain: tuple
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(self.domain))
        object.__setattr__(self, "values", tuple(self.values))
        if len(self.domain) != len(self.values):
            raise DomainError("fuzzy set needs one value per domain element")

    @classmethod
    def from_mapping(cls, lattice, domain: Sequence[Hashable], mapping: Mapping[Hashable, Any]):
        """Build from ``{state: value}``; unlisted states get 0."""
        domain = tuple(domain)
        known = set(domain)
        for k in mapping:
            if k not in known:
                raise DomainError(f"unknown state {k!r}")
        vals = tuple(lattice.parse(mapping[s]) if s in mapping else lattice.bottom for s in domain)
        return cls(lattice, domain, vals)

    @classmethod
    def constant(cls, lattice, domain, value):
        return cls(lattice, tuple(domain), tuple(value for _ in domain))

    def __getitem__(self, state):
        return self.values[self.domain.index(state)]

    def as_dict(self) -> dict:
        return dict(zip(self.domain, self.values))

    def leq(self, other: "FuzzySet") -> bool:
        _same_lattice(self.lattice, other.lattice)
        if self.domain != other.domain:
            raise DomainError("fuzzy sets over different domains")
        return all(self.lattice.leq(a, b) for a, b in zip(self.values, other.values))


class FuzzyRelation:
    """Dense ``|rows| x |cols|`` table of lattice values.

    Instances are treated as immutable; ``table`` is a tuple of tuples.
    """

    __slots__ = ("lattice", "rows", "cols", "table", "_rindex", "_cindex")

    def __init__(self, lattice: ResiduatedLattice, rows: Sequence[Hashable],
                 cols: Sequence[Hashable], table: Sequence[Sequence]):
        self.lattice = lattice
        self.rows = tuple(rows)
        self.cols = tuple(cols)
        self.table = tuple(tuple(r) for r in table)
        if len(self.table) != len(self.rows) or any(len(r) != len(self.cols) for r in self.table):
            raise DomainError("relation table does not match its domains")
        self._rindex = {s: i for i, s in enumerate(self.rows)}
        self._cindex = {s: i for i, s in enumerate(self.cols)}

    # -- construction ------------------------------------------------------
    @classmethod
    def zeros(cls, lattice, rows, cols):
        return cls(lattice, rows, cols, [[lattice.bottom] * len(cols) for _ in rows])

    @classmethod
    def ones(cls, lattice, rows, cols):
        return cls(lattice, rows, cols, [[lattice.top] * len(cols) for _ in rows])

    @classmethod
    def identity(cls, lattice, domain):
        domain = tuple(domain)
        return cls(lattice, domain, domain,
                   [[lattice.top if i == j else lattice.bottom for j in range(len(domain))]
                    for i in range(len(domain))])

    @classmethod
    def from_entries(cls, lattice, rows, cols, entries: Iterable[Sequence]):
        """Entries are ``(row, col, value)``; omitted cells are 0."""
        rows, cols = tuple(rows), tuple(cols)
        ri = {s: i for i, s in enumerate(rows)}
        ci = {s: i for i, s in enumerate(cols)}
        table = [[lattice.bottom] * len(cols) for _ in rows]
        for entry in entries:
            if len(entry) != 3:
                raise DomainError(f"relation entry must be [row, col, value]: {entry!r}")
            r, c, v = entry
            if r not in ri:
                raise DomainError(f"unknown row state {r!r}")
            if c not in ci:
                raise DomainError(f"unknown column state {c!r}")
            table[ri[r]][ci[c]] = lattice.parse(v)
        return cls(lattice, rows, cols, table)

    @classmethod
    def from_dict(cls, lattice, rows, cols, mapping: Mapping[tuple, Any]):
        return cls.from_entries(lattice, rows, cols, [(r, c, v) for (r, c), v in mapping.items()])

    # -- access ------------------------------------------------------------
    def __call__(self, x, y):
        return self.table[self._rindex[x]][self._cindex[y]]

    def row_index(self, x) -> int:
        return self._rindex[x]

    def col_index(self, y) -> int:
        return self._cindex[y]

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def entries(self, include_zero: bool = False):
        bot = self.lattice.bottom
        for i, r in enumerate(self.rows):
            for j, c in enumerate(self.cols):
                v = self.table[i][j]
                if include_zero or v != bot:
                    yield r, c, v

    def replace(self, x, y, value) -> "FuzzyRelation":
        table = [list(r) for r in self.table]
        table[self._rindex[x]][self._cindex[y]] = value
        return FuzzyRelation(self.lattice, self.rows, self.cols, table)

    def __eq__(self, other):
        if not isinstance(other, FuzzyRelation):
            return NotImplemented
        return (self.lattice.name == other.lattice.name and self.rows == other.rows
                and self.cols == other.cols and self.table == other.table)

    def __hash__(self):
        return hash((self.rows, self.cols, self.table))

    def __repr__(self):
        nz = ", ".join(f"({r},{c}):{self.lattice.format(v)}" for r, c, v in self.entries())
        return f"FuzzyRelation({{{nz}}})"

    # -- JSON --------------------------------------------------------------
    def to_json(self, decimal: int | None = None) -> dict:
        fmt = self.lattice.format
        return {
            "rows": list(self.rows),
            "cols": list(self.cols),
            "entries": [[r, c, fmt(v, decimal)] for r, c, v in self.entries()],
        }

    @classmethod
    def from_json(cls, lattice, doc: Mapping):
        try:
            return cls.from_entries(lattice, doc["rows"], doc["cols"], doc.get("entries", []))
        except KeyError as exc:
            raise DomainError(f"relation document is missing {exc}") from None


def converse(R: FuzzyRelation) -> FuzzyRelation:
    T = R.table
    return FuzzyRelation(R.lattice, R.cols, R.rows,
                         [[T[i][j] for i in range(len(R.rows))] for j in range(len(R.cols))])


def compose(R: FuzzyRelation, S: FuzzyRelation) -> FuzzyRelation:
    """``(R o S)(x, z) = sup_y R(x, y) (x) S(y, z)``."""
    _same_lattice(R.lattice, S.lattice)
    if R.cols != S.rows:
        raise DomainError("composition needs R's target domain to equal S's source domain")
    L = R.lattice
    t, sup = L.tnorm, L.sup
    cols_s = [[S.table[i][j] for i in range(len(S.rows))] for j in range(len(S.cols))]
    table = [[sup(t(a, b) for a, b in zip(row, col)) for col in cols_s] for row in R.table]
    return FuzzyRelation(L, R.rows, S.cols, table)


def _check_same_shape(rels: Sequence[FuzzyRelation]) -> None:
    first = rels[0]
    for R in rels[1:]:
        _same_lattice(first.lattice, R.lattice)
        if R.rows != first.rows or R.cols != first.cols:
            raise DomainError("relations over different domains")


def sup_relations(rels: Sequence[FuzzyRelation]) -> FuzzyRelation:
    rels = list(rels)
    if not rels:
        raise DomainError("sup of an empty family needs explicit domains")
    _check_same_shape(rels)
    L = rels[0].lattice
    table = [[L.sup(cells) for cells in zip(*rows)] for rows in zip(*(R.table for R in rels))]
    return FuzzyRelation(L, rels[0].rows, rels[0].cols, table)


def inf_relations(rels: Sequence[FuzzyRelation]) -> FuzzyRelation:
    rels = list(rels)
    if not rels:
        raise DomainError("inf of an empty family needs explicit domains")
    _check_same_shape(rels)
    L = rels[0].lattice
    table = [[L.inf(cells) for cells in zip(*rows)] for rows in zip(*(R.table for R in rels))]
    return FuzzyRelation(L, rels[0].rows, rels[0].cols, table)


def leq_relations(R: FuzzyRelation, S: FuzzyRelation) -> bool:
    _check_same_shape([R, S])
    leq = R.lattice.leq
    return all(leq(a, b) for ra, rb in zip(R.table, S.table) for a, b in zip(ra, rb))


@dataclass(frozen=True)
class RelationClass:
    reflexive: bool
    symmetric: bool
    transitive: bool

    @property
    def equivalence(self) -> bool:
        return self.reflexive and self.symmetric and self.transitive


def classify(R: FuzzyRelation) -> RelationClass:
    if not R.is_square:
        raise DomainError("classify needs a relation on a single domain")
    L = R.lattice
    T = R.table
    n = len(R.rows)
    reflexive = all(T[i][i] == L.top for i in range(n))
    symmetric = all(T[i][j] == T[j][i] for i in range(n) for j in range(i + 1, n))
    transitive = all(L.leq(L.tnorm(T[i][j], T[j][k]), T[i][k])
                     for i in range(n) for j in range(n) for k in range(n))
    return RelationClass(reflexive, symmetric, transitive)


def compose_set_relation(f: FuzzySet, R: FuzzyRelation) -> FuzzySet:
    """``(f o R)(y) = sup_x f(x) (x) R(x, y)``."""
    _same_lattice(f.lattice, R.lattice)
    if f.domain != R.rows:
        raise DomainError("fuzzy set domain must equal the relation's source domain")
    L = R.lattice
    vals = tuple(L.sup(L.tnorm(f.values[i], R.table[i][j]) for i in range(len(R.rows)))
                 for j in range(len(R.cols)))
    return FuzzySet(L, R.cols, vals)


def compose_relation_set(R: FuzzyRelation, g: FuzzySet) -> FuzzySet:
    """``(R o g)(x) = sup_y R(x, y) (x) g(y)``."""
    _same_lattice(g.lattice, R.lattice)
    if g.domain != R.cols:
        raise DomainError("fuzzy set domain must equal the relation's target domain")
    L = R.lattice
    vals = tuple(L.sup(L.tnorm(a, b) for a, b in zip(row, g.values)) for row in R.table)
    return FuzzySet(L, R.rows, vals)
