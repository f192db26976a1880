"""Depth, core and iterated revision over sets of propositional models.

Assignments over variables ``v_0 .. v_{n-1}`` are integers with ``v_j`` at bit
``j``; a :class:`ModelSet` is a bitmask over the ``2**n`` assignments.  When
printed, an assignment is a bit-string with ``v_0`` leftmost.

The depth of a member is its distance to the nearest non-member.  ``core(X, m)``
keeps the members at least ``1/m`` as deep as the deepest one.  ``peel``
removes the members closest to the outside, one revision step at a time, until
what is left is equidistant from the outside.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Iterator, Optional, Sequence, Union

import numpy as np

from .bits import iter_bits
from .errors import EmptyInput, InputError, NotAMember, ParseError, UnknownVariable, UnsatisfiableInput

MAX_VARS = 16
INF = math.inf

# -- formulas -----------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Not:
    arg: "Formula"


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


Formula = Union[Var, Const, Not, And, Or, Implies]

_TOKEN_RE = re.compile(r"\s*(?:(->)|([!&|()])|([a-z][a-z0-9_]*)|(\S))")
_KEYWORDS = {"true": True, "false": False}


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            break
        group = m.lastindex
        if group == 4:
            raise ParseError(f"unexpected character {m.group(4)!r} at column {m.start(4) + 1}")
        tokens.append((m.group(group), m.start(group)))
        pos = m.end()
    return tokens


class _Parser:
    # precedence: ! > & > | > ->, with -> right-associative

    def __init__(self, text: str, variables: Sequence[str]):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.variables = set(variables)

    def peek(self) -> Optional[str]:
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def take(self, expected: Optional[str] = None) -> str:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of formula")
        if expected is not None and tok != expected:
            raise ParseError(f"expected {expected!r}, got {tok!r} at column {self.tokens[self.pos][1] + 1}")
        self.pos += 1
        return tok

    def parse(self) -> Formula:
        node = self.implication()
        if self.peek() is not None:
            raise ParseError(f"unexpected {self.peek()!r} at column {self.tokens[self.pos][1] + 1}")
        return node

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        node = self.conjunction()
        while self.peek() == "|":
            self.take()
            node = Or(node, self.conjunction())
        return node

    def conjunction(self) -> Formula:
        node = self.unary()
        while self.peek() == "&":
            self.take()
            node = And(node, self.unary())
        return node

    def unary(self) -> Formula:
        tok = self.peek()
        if tok == "!":
            self.take()
            return Not(self.unary())
        if tok == "(":
            self.take()
            node = self.implication()
            self.take(")")
            return node
        if tok is None:
            raise ParseError("unexpected end of formula")
        if tok in _KEYWORDS:
            self.take()
            return Const(_KEYWORDS[tok])
        if re.fullmatch(r"[a-z][a-z0-9_]*", tok):
            if tok not in self.variables:
                raise UnknownVariable(f"variable {tok!r} is not declared")
            self.take()
            return Var(tok)
        raise ParseError(f"unexpected {tok!r} at column {self.tokens[self.pos][1] + 1}")


def parse_formula(text: str, variables: Sequence[str]) -> Formula:
    return _Parser(text, check_variables(variables)).parse()


def format_formula(f: Formula) -> str:
    if isinstance(f, Var):
        return f.name
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Not):
        return "!" + format_formula(f.arg) if isinstance(f.arg, (Var, Const, Not)) else f"!({format_formula(f.arg)})"
    op = {And: "&", Or: "|", Implies: "->"}[type(f)]
    return f"({format_formula(f.left)} {op} {format_formula(f.right)})"


def check_variables(variables: Sequence[str]) -> tuple[str, ...]:
    variables = tuple(variables)
    if len(variables) > MAX_VARS:
        raise InputError(f"at most {MAX_VARS} variables are supported")
    if len(set(variables)) != len(variables):
        raise InputError("duplicate variable")
    for v in variables:
        if not re.fullmatch(r"[a-z][a-z0-9_]*", v) or v in _KEYWORDS:
            raise InputError(f"bad variable name {v!r}")
    return variables


# -- model sets ---------------------------------------------------------------


@dataclass(frozen=True)
class ModelSet:
    variables: tuple[str, ...]
    bits: int

    def __post_init__(self):
        if self.bits < 0 or self.bits >> (1 << len(self.variables)):
            raise InputError("model set has bits beyond the assignment space")

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def size(self) -> int:
        return 1 << self.n

    @classmethod
    def of(cls, variables: Sequence[str], assignments) -> "ModelSet":
        bits = 0
        for a in assignments:
            bits |= 1 << a
        return cls(tuple(variables), bits)

    @classmethod
    def universe(cls, variables: Sequence[str]) -> "ModelSet":
        variables = tuple(variables)
        return cls(variables, (1 << (1 << len(variables))) - 1)

    @classmethod
    def from_strings(cls, variables: Sequence[str], strings) -> "ModelSet":
        return cls.of(variables, (parse_assignment(s) for s in strings))

    def __contains__(self, assignment: int) -> bool:
        return bool(self.bits >> assignment & 1)

    def __iter__(self) -> Iterator[int]:
        return iter_bits(self.bits)

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __bool__(self) -> bool:
        return self.bits != 0

    def _same(self, other: "ModelSet") -> None:
        if other.variables != self.variables:
            raise InputError("model sets over different variables")

    def __or__(self, other: "ModelSet") -> "ModelSet":
        self._same(other)
        return ModelSet(self.variables, self.bits | other.bits)

    def __and__(self, other: "ModelSet") -> "ModelSet":
        self._same(other)
        return ModelSet(self.variables, self.bits & other.bits)

    def __sub__(self, other: "ModelSet") -> "ModelSet":
        self._same(other)
        return ModelSet(self.variables, self.bits & ~other.bits)

    def complement(self) -> "ModelSet":
        return ModelSet.universe(self.variables) - self

    def is_universe(self) -> bool:
        return self.bits == (1 << self.size) - 1

    def issubset(self, other: "ModelSet") -> bool:
        self._same(other)
        return self.bits & ~other.bits == 0

    def strings(self) -> list[str]:
        return [format_assignment(a, self.n) for a in self]

    def __repr__(self) -> str:
        return f"ModelSet({','.join(self.variables)}: {{{', '.join(self.strings())}}})"


def format_assignment(a: int, n: int) -> str:
    """Bit-string with the first variable leftmost."""
    return "".join("1" if a >> j & 1 else "0" for j in range(n))


def parse_assignment(s: str) -> int:
    if not re.fullmatch(r"[01]*", s):
        raise InputError(f"bad assignment {s!r}")
    return sum(1 << j for j, ch in enumerate(s) if ch == "1")


def models(f: Formula, variables: Sequence[str]) -> ModelSet:
    """All satisfying assignments, computed on whole truth-table columns.

    Every subformula evaluates to a ``2**n``-bit mask whose bit ``a`` is its truth
    value under assignment ``a``.
    """
    variables = check_variables(variables)
    n = len(variables)
    full = (1 << (1 << n)) - 1
    index = {v: j for j, v in enumerate(variables)}
    columns: dict[str, int] = {}

    def column(j: int) -> int:
        # assignments with bit j set
        block = ((1 << (1 << j)) - 1) << (1 << j)
        period = 1 << (j + 1)
        mask = 0
        for start in range(0, 1 << n, period):
            mask |= block << start
        return mask

    def ev(g: Formula) -> int:
        if isinstance(g, Var):
            if g.name not in index:
                raise UnknownVariable(f"variable {g.name!r} is not declared")
            if g.name not in columns:
                columns[g.name] = column(index[g.name])
            return columns[g.name]
        if isinstance(g, Const):
            return full if g.value else 0
        if isinstance(g, Not):
            return full ^ ev(g.arg)
        if isinstance(g, And):
            return ev(g.left) & ev(g.right)
        if isinstance(g, Or):
            return ev(g.left) | ev(g.right)
        if isinstance(g, Implies):
            return (full ^ ev(g.left)) | ev(g.right)
        raise TypeError(f"not a formula: {g!r}")

    return ModelSet(variables, ev(f))


def dnf(X: ModelSet) -> Formula:
    """Full disjunctive normal form denoting exactly ``X`` (``false`` when empty)."""
    terms = []
    for a in X:
        lits = [Var(v) if a >> j & 1 else Not(Var(v)) for j, v in enumerate(X.variables)]
        term: Formula = lits[0] if lits else Const(True)
        for lit in lits[1:]:
            term = And(term, lit)
        terms.append(term)
    if not terms:
        return Const(False)
    out = terms[0]
    for t in terms[1:]:
        out = Or(out, t)
    return out


# -- distances ----------------------------------------------------------------


class DistanceFn:
    """A symmetric, nonnegative integer distance on assignments of ``n`` variables.

    ``fn`` must be pure.  Symmetry, identity and nonnegativity are checked on
    construction: exhaustively for n <= 8, on a seeded sample above that.
    """

    def __init__(self, fn: Callable[[int, int], int], n: int, name: str = "custom"):
        self.fn = fn
        self.n = n
        self.name = name
        self._validate()

    def __call__(self, x: int, y: int) -> int:
        return self.fn(x, y)

    def _validate(self) -> None:
        size = 1 << self.n
        if self.n <= 8:
            pairs = ((x, y) for x in range(size) for y in range(x, size))
        else:
            rng = random.Random(0)
            pairs = ((rng.randrange(size), rng.randrange(size)) for _ in range(20000))
        for x, y in pairs:
            d = self.fn(x, y)
            if x == y and d != 0:
                raise InputError(f"distance {self.name}: d({x},{x}) = {d} != 0")
            if d < 0 or d != self.fn(y, x):
                raise InputError(f"distance {self.name}: not symmetric/nonnegative at ({x},{y})")

    @cached_property
    def matrix(self) -> np.ndarray:
        size = 1 << self.n
        if self.name == "hamming":
            idx = np.arange(size, dtype=np.uint32)
            return np.bitwise_count(idx[:, None] ^ idx[None, :]).astype(np.int64)
        return np.array([[self.fn(x, y) for y in range(size)] for x in range(size)], dtype=np.int64)


@lru_cache(maxsize=None)
def hamming(n: int) -> DistanceFn:
    return DistanceFn(lambda x, y: (x ^ y).bit_count(), n, name="hamming")


def _distance_for(X: ModelSet, d: Optional[DistanceFn]) -> DistanceFn:
    if d is None:
        return hamming(X.n)
    if d.n != X.n:
        raise InputError("distance and model set disagree on the number of variables")
    return d


def _indices(bits: int, size: int) -> np.ndarray:
    return np.fromiter(iter_bits(bits), dtype=np.int64, count=bits.bit_count())


# -- depth and core -----------------------------------------------------------


def depth_point(X: ModelSet, x: int, d: Optional[DistanceFn] = None) -> float:
    """Distance from member ``x`` to the nearest non-member (``inf`` if none)."""
    if x not in X:
        raise NotAMember(f"{format_assignment(x, X.n)} is not in the set")
    d = _distance_for(X, d)
    outside = list(X.complement())
    if not outside:
        return INF
    return min(d(x, y) for y in outside)


def depths(X: ModelSet, d: Optional[DistanceFn] = None) -> dict[int, float]:
    """Depth of every member of ``X``."""
    d = _distance_for(X, d)
    members = _indices(X.bits, X.size)
    outside = _indices(X.complement().bits, X.size)
    if len(outside) == 0:
        return {int(x): INF for x in members}
    best = d.matrix[np.ix_(members, outside)].min(axis=1)
    return {int(x): int(v) for x, v in zip(members, best)}


def depth_set(X: ModelSet, d: Optional[DistanceFn] = None) -> float:
    if not X:
        raise EmptyInput("depth of the empty set is undefined")
    return max(depths(X, d).values())


def core(X: ModelSet, m: int, d: Optional[DistanceFn] = None) -> ModelSet:
    """Members whose depth is at least ``depth(X) / m``, compared as ``m·depth(x) >= depth(X)``."""
    if not X:
        raise EmptyInput("core of the empty set is undefined")
    if m < 1:
        raise InputError("m must be a positive integer")
    if X.is_universe():
        return X
    dep = depths(X, d)
    top = max(dep.values())
    return ModelSet.of(X.variables, (x for x, v in dep.items() if m * v >= top))


# -- revision and peeling -----------------------------------------------------


def revise(Y: ModelSet, X: ModelSet, d: Optional[DistanceFn] = None) -> ModelSet:
    """Members of ``X`` closest to ``Y``.  An empty ``Y`` leaves ``X`` unchanged."""
    X._same(Y)
    if not X:
        raise EmptyInput("cannot revise into an empty set")
    if not Y:
        return X
    d = _distance_for(X, d)
    xs = _indices(X.bits, X.size)
    ys = _indices(Y.bits, X.size)
    dist = d.matrix[np.ix_(ys, xs)].min(axis=0)
    closest = xs[dist == dist.min()]
    return ModelSet.of(X.variables, (int(x) for x in closest))


@dataclass(frozen=True)
class PeelResult:
    layers: tuple[ModelSet, ...]
    remaining: tuple[ModelSet, ...]  # X_0, X_1, ..., X_n
    core: ModelSet

    @property
    def last_index(self) -> int:
        return len(self.layers) - 1


def peel(X0: ModelSet, d: Optional[DistanceFn] = None) -> PeelResult:
    """Strip the outermost members by repeated revision.

    ``Z_i`` is the revision of ``X_i`` by everything already outside; it is
    removed and added to the outside, until ``Z_n = X_n``.  The result's ``core``
    is ``X_{ceil(n/2)}``, the union of the nested sets ``X_n .. X_{n/2}``.
    """
    if not X0:
        raise EmptyInput("cannot peel the empty set")
    if X0.is_universe():
        return PeelResult((X0,), (X0,), X0)
    d = _distance_for(X0, d)
    x, y = X0, X0.complement()
    layers, remaining = [], [x]
    while True:
        z = revise(y, x, d)
        layers.append(z)
        if z == x:
            break
        x, y = x - z, y | z
        remaining.append(x)
    n = len(layers) - 1
    return PeelResult(tuple(layers), tuple(remaining), remaining[-(-n // 2)])


def revise_formula(psi: Formula, phi: Formula, variables: Sequence[str],
                   d: Optional[DistanceFn] = None) -> Formula:
    """Formula whose models are the revision of ``phi``'s models by ``psi``'s."""
    return dnf(revise(models(psi, variables), models(phi, variables), d))


def peel_formula(phi: Formula, variables: Sequence[str],
                 d: Optional[DistanceFn] = None) -> PeelResult:
    """The peeling loop run on formulas.

    ``psi`` starts as the negation of ``phi``; each step revises, conjoins the
    negated revision onto ``phi`` and disjoins it onto ``psi``.  Models are only
    taken to test for termination and to report the result.
    """
    variables = check_variables(variables)
    X0 = models(phi, variables)
    if not X0:
        raise UnsatisfiableInput("formula has no models")
    if X0.is_universe():
        return PeelResult((X0,), (X0,), X0)
    psi: Formula = Not(phi)
    formulas = [phi]
    taus = []
    while True:
        tau = revise_formula(psi, phi, variables, d)
        taus.append(tau)
        if models(tau, variables) == models(phi, variables):
            break
        phi = And(phi, Not(tau))
        psi = Or(psi, tau)
        formulas.append(phi)
    n = len(taus) - 1
    layers = tuple(models(t, variables) for t in taus)
    remaining = tuple(models(f, variables) for f in formulas)
    return PeelResult(layers, remaining, remaining[-(-n // 2)])


def core_formula(phi: Formula, variables: Sequence[str], m: int,
                 d: Optional[DistanceFn] = None) -> ModelSet:
    X = models(phi, variables)
    if not X:
        raise UnsatisfiableInput("formula has no models")
    return core(X, m, d)


def random_formula(rng: random.Random, variables: Sequence[str], size: int = 12) -> Formula:
    """A random formula with roughly ``size`` connectives."""
    if size <= 0 or rng.random() < 0.15:
        if rng.random() < 0.05:
            return Const(rng.random() < 0.5)
        return Var(rng.choice(list(variables)))
    kind = rng.choice(["not", "and", "or", "or", "and", "imp"])
    if kind == "not":
        return Not(random_formula(rng, variables, size - 1))
    left = rng.randint(0, size - 1)
    a = random_formula(rng, variables, left)
    b = random_formula(rng, variables, size - 1 - left)
    return {"and": And, "or": Or, "imp": Implies}[kind](a, b)
