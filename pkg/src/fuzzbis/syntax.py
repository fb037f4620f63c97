"""Programs and formulas of fuzzy PDL, a text grammar, and fragment tests.

Concrete grammar (loosest to tightest)::

    formula  := disj ( '->' formula )?          right associative
    disj     := conj ( '\\/' conj )*
    conj     := unary ( '/\\' unary )*
    unary    := '~' unary | '<' program '>' unary | '[' program ']' unary | atom
    atom     := NUMBER | 'label' | IDENT | '(' formula ')'

    program  := seq ( '|' seq )*
    seq      := post ( ';' post )*
    post     := patom ( '*' | '?' )*
    patom    := IDENT | '(' program ')' | unary '?'

``a -> phi`` and ``phi -> a`` with a constant ``a`` parse to the constant
implication nodes; ``->`` between two non-constants is the full implication.
``a -> b`` with two constants reads as ``a -> phi``; write ``(a) -> b`` for
the other reading.
Numbers are ``0``, ``1``, decimals such as ``0.25`` or fractions ``3/4``.
Quoted labels (``'a'``) name elements of table-defined lattices.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Union

from .lattice import ResiduatedLattice


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


# -- AST ---------------------------------------------------------------------

@dataclass(frozen=True)
class Atomic:
    name: str


@dataclass(frozen=True)
class Test:
    formula: "Formula"
    __test__ = False  # keep pytest from collecting it


@dataclass(frozen=True)
class Union_:
    left: "Program"
    right: "Program"


@dataclass(frozen=True)
class Compose:
    left: "Program"
    right: "Program"


@dataclass(frozen=True)
class Star:
    body: "Program"


Program = Union[Atomic, Test, Union_, Compose, Star]


@dataclass(frozen=True)
class Const:
    value: object


@dataclass(frozen=True)
class Prop:
    name: str


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class ImpliesFromConst:
    const: object
    body: "Formula"


@dataclass(frozen=True)
class ImpliesToConst:
    body: "Formula"
    const: object


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class Box:
    program: Program
    body: "Formula"


@dataclass(frozen=True)
class Diamond:
    program: Program
    body: "Formula"


Formula = Union[Const, Prop, And, Or, Implies, ImpliesFromConst, ImpliesToConst, Not, Box, Diamond]


class Constructor(enum.Enum):
    """Constructors that a fragment may exclude."""

    UNION = "|"
    IMPLIES = "->"
    TEST = "?"


@dataclass(frozen=True)
class FragmentSpec:
    excluded: frozenset = frozenset()

    @classmethod
    def of(cls, *markers) -> "FragmentSpec":
        return cls(frozenset(_marker(m) for m in markers))

    def allows(self, c: Constructor) -> bool:
        return c not in self.excluded

    def __str__(self):
        inner = ", ".join(sorted(c.value for c in self.excluded))
        return "{" + inner + "}"


_MARKER_ALIASES = {
    "|": Constructor.UNION, "u": Constructor.UNION, "union": Constructor.UNION, "∪": Constructor.UNION,
    "->": Constructor.IMPLIES, "implies": Constructor.IMPLIES, "→": Constructor.IMPLIES,
    "?": Constructor.TEST, "test": Constructor.TEST,
}


def _marker(m) -> Constructor:
    if isinstance(m, Constructor):
        return m
    try:
        return _MARKER_ALIASES[str(m).strip().lower()]
    except KeyError:
        raise ValueError(f"unknown fragment marker {m!r}; use one of | -> ?") from None


FULL = FragmentSpec()
KZ_FRAGMENT = FragmentSpec(frozenset(Constructor))


# -- traversal ---------------------------------------------------------------

def subterms(node) -> Iterable:
    """Pre-order walk over formulas and programs."""
    yield node
    if isinstance(node, (Atomic, Const, Prop)):
        return
    if isinstance(node, Test):
        yield from subterms(node.formula)
    elif isinstance(node, (Union_, Compose, And, Or, Implies)):
        yield from subterms(node.left)
        yield from subterms(node.right)
    elif isinstance(node, (Star, Not, ImpliesFromConst, ImpliesToConst)):
        yield from subterms(node.body)
    elif isinstance(node, (Box, Diamond)):
        yield from subterms(node.program)
        yield from subterms(node.body)
    else:
        raise TypeError(f"not a formula or program: {node!r}")


def constructors_used(node) -> set[Constructor]:
    used = set()
    for t in subterms(node):
        if isinstance(t, Union_):
            used.add(Constructor.UNION)
        elif isinstance(t, Test):
            used.add(Constructor.TEST)
        elif isinstance(t, Implies):
            used.add(Constructor.IMPLIES)
    return used


def smallest_fragment(node) -> FragmentSpec:
    """The fragment excluding every constructor ``node`` does not use."""
    return FragmentSpec(frozenset(Constructor) - constructors_used(node))


def in_fragment(node, fragment: FragmentSpec) -> bool:
    # Not and the constant implications stay available in every fragment
    return not (constructors_used(node) & fragment.excluded)


def is_fKz(phi) -> bool:
    if isinstance(phi, (Const, Prop)):
        return True
    if isinstance(phi, And):
        return is_fKz(phi.left) and is_fKz(phi.right)
    if isinstance(phi, (ImpliesFromConst, ImpliesToConst)):
        return is_fKz(phi.body)
    if isinstance(phi, Diamond):
        return isinstance(phi.program, Atomic) and is_fKz(phi.body)
    return False


def props_of(node) -> set[str]:
    return {t.name for t in subterms(node) if isinstance(t, Prop)}


def actions_of(node) -> set[str]:
    return {t.name for t in subterms(node) if isinstance(t, Atomic)}


def depth(phi) -> int:
    """Constructor nesting depth; atoms and constants have depth 0."""
    if isinstance(phi, (Const, Prop, Atomic)):
        return 0
    if isinstance(phi, (And, Or, Implies, Union_, Compose)):
        return 1 + max(depth(phi.left), depth(phi.right))
    if isinstance(phi, (ImpliesFromConst, ImpliesToConst, Not, Star)):
        return 1 + depth(phi.body)
    if isinstance(phi, Test):
        return 1 + depth(phi.formula)
    if isinstance(phi, (Box, Diamond)):
        return 1 + max(depth(phi.program), depth(phi.body))
    raise TypeError(f"not a formula or program: {phi!r}")


def big_wedge(formulas: Iterable, top) -> "Formula":
    """``phi1 /\\ (phi2 /\\ (... /\\ top))``; the empty conjunction is ``top``."""
    result: Formula = Const(top)
    for phi in reversed(list(formulas)):
        result = And(phi, result)
    return result


# -- printing ----------------------------------------------------------------

def _fmt_const(value, lattice: ResiduatedLattice | None) -> str:
    from fractions import Fraction

    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    if lattice is not None:
        return f"'{lattice.format(value)}'"
    return f"'{value}'"


def to_text(node, lattice: ResiduatedLattice | None = None) -> str:
    """Print with enough parentheses that :func:`parse_formula` gives the same tree."""
    f = lambda n: to_text(n, lattice)  # noqa: E731
    if isinstance(node, Const):
        return _fmt_const(node.value, lattice)
    if isinstance(node, Prop):
        return node.name
    if isinstance(node, And):
        return f"({f(node.left)} /\\ {f(node.right)})"
    if isinstance(node, Or):
        return f"({f(node.left)} \\/ {f(node.right)})"
    if isinstance(node, Implies):
        return f"({f(node.left)} -> {f(node.right)})"
    if isinstance(node, ImpliesFromConst):
        return f"({_fmt_const(node.const, lattice)} -> {f(node.body)})"
    if isinstance(node, ImpliesToConst):
        body = f"({f(node.body)})" if isinstance(node.body, Const) else f(node.body)
        return f"({body} -> {_fmt_const(node.const, lattice)})"
    if isinstance(node, Not):
        return f"~{f(node.body)}"
    if isinstance(node, Box):
        return f"[{f(node.program)}]{f(node.body)}"
    if isinstance(node, Diamond):
        return f"<{f(node.program)}>{f(node.body)}"
    if isinstance(node, Atomic):
        return node.name
    if isinstance(node, Test):
        return f"({f(node.formula)})?"
    if isinstance(node, Union_):
        return f"({f(node.left)} | {f(node.right)})"
    if isinstance(node, Compose):
        return f"({f(node.left)} ; {f(node.right)})"
    if isinstance(node, Star):
        return f"({f(node.body)})*"
    raise TypeError(f"not a formula or program: {node!r}")


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:\.\d+)?(?:/\d+)?)
  | (?P<label>'[^']*')
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>->|/\\|\\/|[~<>\[\]();|*?])
""", re.VERBOSE)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Backtrack(Exception):
    pass


class _Parser:
    def __init__(self, text: str, lattice: ResiduatedLattice):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.lattice = lattice

    # helpers
    def peek(self, k: int = 0):
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, value: str) -> bool:
        kind, tok, _ = self.peek()
        return kind == "op" and tok == value

    def expect(self, value: str):
        kind, tok, pos = self.peek()
        if kind != "op" or tok != value:
            raise ParseError(f"expected {value!r}, found {tok or 'end of input'!r}", pos)
        self.i += 1

    def error(self, message: str):
        raise ParseError(message, self.peek()[2])

    # formulas
    def formula(self):
        start = self.i
        left = self.disj()
        if self.at("->"):
            bare_left = self.i == start + 1
            self.i += 1
            right = self.formula()
            # a parenthesised constant on the left, '(a) -> b', is the body of an
            # implication into a constant
            if isinstance(left, Const) and bare_left:
                return ImpliesFromConst(left.value, right)
            if isinstance(right, Const):
                return ImpliesToConst(left, right.value)
            if isinstance(left, Const):
                return ImpliesFromConst(left.value, right)
            return Implies(left, right)
        return left

    def disj(self):
        left = self.conj()
        while self.at("\\/"):
            self.i += 1
            left = Or(left, self.conj())
        return left

    def conj(self):
        left = self.unary()
        while self.at("/\\"):
            self.i += 1
            left = And(left, self.unary())
        return left

    def unary(self):
        if self.at("~"):
            self.i += 1
            return Not(self.unary())
        if self.at("<"):
            self.i += 1
            prog = self.program()
            self.expect(">")
            return Diamond(prog, self.unary())
        if self.at("["):
            self.i += 1
            prog = self.program()
            self.expect("]")
            return Box(prog, self.unary())
        return self.atom()

    def atom(self):
        kind, tok, pos = self.peek()
        if kind == "num":
            self.i += 1
            return Const(self._const(tok, pos))
        if kind == "label":
            self.i += 1
            return Const(self._const(tok[1:-1], pos))
        if kind == "ident":
            self.i += 1
            return Prop(tok)
        if self.at("("):
            self.i += 1
            phi = self.formula()
            self.expect(")")
            return phi
        self.error(f"expected a formula, found {tok or 'end of input'!r}")

    def _const(self, tok: str, pos: int):
        try:
            return self.lattice.parse(tok)
        except ValueError as exc:
            raise ParseError(f"constant {tok!r} is not in lattice {self.lattice.name} ({exc})", pos) from None

    # programs
    def program(self):
        left = self.seq()
        while self.at("|"):
            self.i += 1
            left = Union_(left, self.seq())
        return left

    def seq(self):
        left = self.post()
        while self.at(";"):
            self.i += 1
            left = Compose(left, self.post())
        return left

    def post(self):
        prog = self.patom()
        while True:
            if self.at("*"):
                self.i += 1
                prog = Star(prog)
            elif self.at("?"):
                # a postfix ? on a program is only meaningful on a formula; reject
                self.error("'?' must follow a formula")
            else:
                return prog

    def patom(self):
        # a test `phi?` is tried first; fall back to a plain program
        start = self.i
        try:
            phi = self.unary()
            if self.at("?"):
                self.i += 1
                return Test(phi)
            raise _Backtrack
        except (ParseError, _Backtrack):
            self.i = start
        kind, tok, pos = self.peek()
        if kind == "ident":
            self.i += 1
            return Atomic(tok)
        if self.at("("):
            self.i += 1
            prog = self.program()
            self.expect(")")
            return prog
        self.error(f"expected a program, found {tok or 'end of input'!r}")


def parse_formula(text: str, lattice: ResiduatedLattice) -> Formula:
    p = _Parser(text, lattice)
    phi = p.formula()
    kind, tok, pos = p.peek()
    if kind != "eof":
        raise ParseError(f"unexpected {tok!r}", pos)
    return phi


def parse_program(text: str, lattice: ResiduatedLattice) -> Program:
    p = _Parser(text, lattice)
    prog = p.program()
    kind, tok, pos = p.peek()
    if kind != "eof":
        raise ParseError(f"unexpected {tok!r}", pos)
    return prog
