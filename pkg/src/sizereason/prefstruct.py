"""Finite preferential structures and the minimal-element operator.

A structure is a finite list of element names plus a strict "beats" relation.
The pair ``(x, y)`` in ``prefers`` means ``x`` beats ``y`` (``x ≺ y``), so ``y`` is
not minimal in any set containing ``x``.  Subsets are integer bitmasks with bit
``i`` standing for ``elements[i]``.

Only acyclic relations are accepted: on a finite set this is exactly the
condition under which every nonempty subset has a nonempty set of minimal
elements.
"""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Optional, Sequence

from .bits import iter_bits
from .errors import (
    CycleDetected,
    DuplicateName,
    EmptyInput,
    InputError,
    NotRanked,
    ParseError,
    ReflexivePair,
    UnknownName,
)

MAX_ELEMENTS = 16

_NAME_RE = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9_'′.-]*$")


@dataclass(frozen=True)
class PreferentialStructure:
    elements: tuple[str, ...]
    prefers: frozenset[tuple[str, str]]
    # beaten_by[i]: bitmask of the elements that beat element i
    beaten_by: tuple[int, ...] = field(repr=False, compare=False)

    @property
    def n(self) -> int:
        return len(self.elements)

    @property
    def universe(self) -> int:
        return (1 << self.n) - 1

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownName(f"unknown element {name!r}") from None

    @cached_property
    def _index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.elements)}

    def subset(self, names: Iterable[str]) -> int:
        """Bitmask for a collection of element names."""
        mask = 0
        for name in names:
            mask |= 1 << self.index(name)
        return mask

    def names(self, mask: int) -> list[str]:
        return [self.elements[i] for i in iter_bits(mask)]

    def check_subset(self, mask: int) -> int:
        if mask < 0 or mask & ~self.universe:
            raise InputError(f"subset mask {mask:#x} has bits outside the universe")
        return mask

    def beats(self, x: int, y: int) -> bool:
        """True when element ``x`` beats element ``y`` (indices)."""
        return bool(self.beaten_by[y] >> x & 1)

    def mu(self, mask: int) -> int:
        """Minimal (unbeaten) elements of ``mask``; no validation."""
        out = 0
        for i in iter_bits(mask):
            if not self.beaten_by[i] & mask:
                out |= 1 << i
        return out

    @cached_property
    def mu_table(self) -> tuple[int, ...]:
        """``mu_table[A]`` is the minimal-element set of ``A`` for every subset."""
        return tuple(self.mu(a) for a in range(1 << self.n))

    def __str__(self) -> str:
        return format_structure(self)


def build_structure(
    names: Sequence[str], pairs: Iterable[tuple[str, str]]
) -> PreferentialStructure:
    """Validate names and beat-pairs and return an immutable structure.

    Raises DuplicateName, UnknownName, ReflexivePair, or CycleDetected (the
    exception carries one witnessing cycle).
    """
    elements = tuple(names)
    if len(elements) > MAX_ELEMENTS:
        raise InputError(f"at most {MAX_ELEMENTS} elements are supported, got {len(elements)}")
    seen: set[str] = set()
    for name in elements:
        if name in seen:
            raise DuplicateName(f"duplicate element {name!r}")
        seen.add(name)
    index = {name: i for i, name in enumerate(elements)}

    prefers = set()
    beaten_by = [0] * len(elements)
    for pair in pairs:
        x, y = pair
        for name in (x, y):
            if name not in index:
                raise UnknownName(f"unknown element {name!r}")
        if x == y:
            raise ReflexivePair(f"element {x!r} cannot beat itself")
        prefers.add((x, y))
        beaten_by[index[y]] |= 1 << index[x]

    cycle = _find_cycle(elements, beaten_by)
    if cycle:
        raise CycleDetected("preference relation has a cycle: " + " ≺ ".join(cycle), cycle)
    return PreferentialStructure(elements, frozenset(prefers), tuple(beaten_by))


def _find_cycle(elements: Sequence[str], beaten_by: Sequence[int]) -> list[str]:
    # iterative DFS along "beats" edges x -> y
    n = len(elements)
    beats = [0] * n
    for y in range(n):
        for x in iter_bits(beaten_by[y]):
            beats[x] |= 1 << y
    state = [0] * n  # 0 new, 1 on stack, 2 done
    for root in range(n):
        if state[root]:
            continue
        stack = [(root, iter(list(iter_bits(beats[root]))))]
        path = [root]
        state[root] = 1
        while stack:
            node, children = stack[-1]
            for child in children:
                if state[child] == 1:
                    start = path.index(child)
                    return [elements[i] for i in path[start:]] + [elements[child]]
                if state[child] == 0:
                    state[child] = 1
                    path.append(child)
                    stack.append((child, iter(list(iter_bits(beats[child])))))
                    break
            else:
                state[node] = 2
                path.pop()
                stack.pop()
    return []


def mu(S: PreferentialStructure, A: int) -> int:
    """Elements of ``A`` beaten by no element of ``A``."""
    S.check_subset(A)
    if not A:
        raise EmptyInput("mu is undefined on the empty set")
    return S.mu(A)


def transitivity_violation(S: PreferentialStructure) -> Optional[tuple[int, int, int]]:
    """Return ``(x, y, z)`` with x ≺ y ≺ z but not x ≺ z, or None."""
    for z in range(S.n):
        for y in iter_bits(S.beaten_by[z]):
            missing = S.beaten_by[y] & ~S.beaten_by[z]
            if missing:
                return (next(iter_bits(missing)), y, z)
    return None


def smoothness_violation(S: PreferentialStructure) -> Optional[tuple[int, int]]:
    """Return ``(A, x)`` where ``x`` in ``A`` is non-minimal yet beaten by no
    minimal element of ``A``; None if the structure is smooth."""
    table = S.mu_table
    for a in range(1, 1 << S.n):
        m = table[a]
        for x in iter_bits(a & ~m):
            if not S.beaten_by[x] & m:
                return (a, x)
    return None


def rankedness_violation(S: PreferentialStructure) -> Optional[tuple[int, int, int]]:
    """Return ``(x, x2, y)`` with x, x2 incomparable and y separating them.

    Separating means x ≺ y but not x2 ≺ y, or y ≺ x but not y ≺ x2.
    """
    n = S.n
    for x, x2 in itertools.permutations(range(n), 2):
        if S.beats(x, x2) or S.beats(x2, x):
            continue
        for y in range(n):
            if S.beats(x, y) and not S.beats(x2, y):
                return (x, x2, y)
            if S.beats(y, x) and not S.beats(y, x2):
                return (x, x2, y)
    return None


def is_transitive(S: PreferentialStructure) -> bool:
    return transitivity_violation(S) is None


def is_smooth(S: PreferentialStructure) -> bool:
    """Every non-minimal element of every subset is beaten by a minimal one."""
    return smoothness_violation(S) is None


def is_ranked(S: PreferentialStructure) -> bool:
    return rankedness_violation(S) is None


def _ranks(S: PreferentialStructure) -> tuple[int, ...]:
    ranks: list[Optional[int]] = [None] * S.n
    remaining = S.universe
    layer = 0
    while remaining:
        # unbeaten among the remaining elements form the next layer
        current = S.mu(remaining)
        for i in iter_bits(current):
            ranks[i] = layer
        remaining &= ~current
        layer += 1
    return tuple(ranks)  # type: ignore[arg-type]


def ranks(S: PreferentialStructure) -> dict[str, int]:
    """Layer index of every element of a ranked structure (0 = most preferred)."""
    if not is_ranked(S):
        raise NotRanked("structure is not ranked")
    return dict(zip(S.elements, _ranks(S)))


def rank_of(S: PreferentialStructure, x: str) -> int:
    return ranks(S)[S.elements[S.index(x)]]


def rank_of_set(S: PreferentialStructure, A: int) -> int:
    """Rank of the minimal elements of ``A`` (all equal when ranked)."""
    m = mu(S, A)
    if not is_ranked(S):
        raise NotRanked("structure is not ranked")
    return _ranks(S)[next(iter_bits(m))]


def transitive_closure(S: PreferentialStructure) -> PreferentialStructure:
    n = S.n
    beaten = list(S.beaten_by)
    changed = True
    while changed:
        changed = False
        for y in range(n):
            extra = 0
            for x in iter_bits(beaten[y]):
                extra |= beaten[x]
            if extra & ~beaten[y]:
                beaten[y] |= extra
                changed = True
    pairs = [(S.elements[x], S.elements[y]) for y in range(n) for x in iter_bits(beaten[y])]
    return build_structure(S.elements, pairs)


# -- text format ------------------------------------------------------------


def parse_structure(text: str) -> PreferentialStructure:
    """Parse the line-oriented structure format.

    ::

        # comment
        elements: a b c
        prefers: c b      # c beats b
    """
    elements: Optional[list[str]] = None
    pairs: list[tuple[str, str]] = []
    pair_lines: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        key = key.strip()
        if not sep:
            raise ParseError(f"expected 'elements:' or 'prefers:', got {line!r}", lineno)
        tokens = rest.split()
        for tok in tokens:
            if not _NAME_RE.match(tok):
                raise ParseError(f"bad element name {tok!r}", lineno)
        if key == "elements":
            if elements is not None:
                raise ParseError("'elements:' given twice", lineno)
            if not tokens:
                raise ParseError("'elements:' needs at least one name", lineno)
            elements = tokens
        elif key == "prefers":
            if elements is None:
                raise ParseError("'prefers:' before 'elements:'", lineno)
            if len(tokens) != 2:
                raise ParseError("'prefers:' takes exactly two names", lineno)
            for tok in tokens:
                if tok not in elements:
                    raise ParseError(f"unknown element {tok!r}", lineno)
            pairs.append((tokens[0], tokens[1]))
            pair_lines.append(lineno)
        else:
            raise ParseError(f"unknown key {key!r}", lineno)
    if elements is None:
        raise ParseError("missing 'elements:' line")
    try:
        return build_structure(elements, pairs)
    except ReflexivePair as exc:
        bad = next(i for i, (x, y) in enumerate(pairs) if x == y)
        raise ParseError(str(exc), pair_lines[bad]) from exc
    except DuplicateName as exc:
        raise ParseError(str(exc)) from exc


def format_structure(S: PreferentialStructure) -> str:
    lines = ["elements: " + " ".join(S.elements)]
    order = {name: i for i, name in enumerate(S.elements)}
    for x, y in sorted(S.prefers, key=lambda p: (order[p[0]], order[p[1]])):
        lines.append(f"prefers: {x} {y}")
    return "\n".join(lines) + "\n"


# -- generators for sweeps ----------------------------------------------------


def default_names(n: int) -> list[str]:
    return [f"e{i}" for i in range(n)]


def enumerate_structures(n: int, labeled: bool = True) -> Iterator[PreferentialStructure]:
    """Yield acyclic structures on ``n`` elements.

    With ``labeled`` every acyclic relation on the named elements is produced
    (543 for n = 4).  Otherwise only relations compatible with the element order
    (``i`` may beat ``j`` only when ``i < j``); every acyclic structure is
    isomorphic to one of these, which is enough for isomorphism-invariant checks.
    """
    names = default_names(n)
    if labeled:
        candidates = list(itertools.permutations(range(n), 2))
    else:
        candidates = list(itertools.combinations(range(n), 2))
    for bits in range(1 << len(candidates)):
        beaten_by = [0] * n
        for k, (x, y) in enumerate(candidates):
            if bits >> k & 1:
                beaten_by[y] |= 1 << x
        if labeled and _find_cycle(names, beaten_by):
            continue
        pairs = frozenset(
            (names[x], names[y]) for y in range(n) for x in iter_bits(beaten_by[y])
        )
        yield PreferentialStructure(tuple(names), pairs, tuple(beaten_by))


def random_structure(
    rng: random.Random, n: int, kind: str = "any", density: Optional[float] = None
) -> PreferentialStructure:
    """Draw a random acyclic structure.

    ``kind`` is ``"any"`` (random DAG), ``"transitive"`` (its transitive closure)
    or ``"ranked"`` (random layering, x ≺ y iff layer(x) < layer(y)).
    """
    names = default_names(n)
    if kind == "ranked":
        layer = [rng.randrange(max(1, n)) for _ in range(n)]
        pairs = [(names[x], names[y]) for x in range(n) for y in range(n) if layer[x] < layer[y]]
        return build_structure(names, pairs)
    p = rng.random() if density is None else density
    order = list(range(n))
    rng.shuffle(order)
    pairs = [
        (names[order[i]], names[order[j]])
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < p
    ]
    S = build_structure(names, pairs)
    if kind == "transitive":
        S = transitive_closure(S)
    elif kind != "any":
        raise ValueError(f"unknown structure kind {kind!r}")
    return S
