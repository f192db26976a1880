"""Defeasible inheritance diagrams read through size.

A positive arrow ``U -> V`` says that most of ``U`` is in ``V``; a negative arrow
``U -/> V`` says that most of ``U`` is outside ``V``.  Conflicts are resolved by
specificity: if ``C`` reaches ``B`` along positive arrows and the two disagree
about ``A``, then ``C`` is the smaller class and its arrow wins.  Conflicts that
specificity cannot resolve split the population into two medium halves, one
inside and one outside the contested node.

:func:`infer` tracks the population of the source node as a list of cells with
dyadic weights.  Properties are inherited strictly downward: a cell only
receives arrows from nodes it is inside of.
"""

from __future__ import annotations

import enum
import random
import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Optional, Sequence

from .errors import (
    ConflictingParallelArrows,
    CycleDetected,
    DuplicateName,
    InputError,
    MutualPositiveArrows,
    ParseError,
    UnknownName,
    UnknownNode,
)

_NAME = r"[A-Za-z_][A-Za-z0-9_'′]*"
_NAME_RE = re.compile(rf"^{_NAME}$")
_ARROW_RE = re.compile(rf"^({_NAME})\s*(-/>|->)\s*({_NAME})$")


class Membership(enum.Enum):
    IN = "IN"
    OUT = "OUT"
    UNKNOWN = "UNKNOWN"


class Status(enum.Enum):
    IN_BIG = "IN_BIG"
    OUT_BIG = "OUT_BIG"
    SPLIT = "SPLIT"
    NONE = "NONE"
    MIXED = "MIXED"


@dataclass(frozen=True)
class InheritanceDiagram:
    nodes: tuple[str, ...]
    pos_arrows: frozenset[tuple[str, str]]
    neg_arrows: frozenset[tuple[str, str]]

    @cached_property
    def _rank(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.nodes)}

    def check_node(self, name: str) -> str:
        if name not in self._rank:
            raise UnknownNode(f"unknown node {name!r}")
        return name

    @cached_property
    def incoming(self) -> dict[str, tuple[tuple[str, bool], ...]]:
        """Arrows into each node as ``(source, positive)``, in node order."""
        into: dict[str, list[tuple[str, bool]]] = {n: [] for n in self.nodes}
        for u, v in self.pos_arrows:
            into[v].append((u, True))
        for u, v in self.neg_arrows:
            into[v].append((u, False))
        return {v: tuple(sorted(a, key=lambda e: (self._rank[e[0]], not e[1])))
                for v, a in into.items()}

    @cached_property
    def outgoing(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, set[str]] = {n: set() for n in self.nodes}
        for u, v in self.pos_arrows | self.neg_arrows:
            out[u].add(v)
        return {u: tuple(sorted(vs, key=self._rank.__getitem__)) for u, vs in out.items()}

    @cached_property
    def positive_reach(self) -> dict[str, frozenset[str]]:
        """Nodes reachable from each node by a nonempty positive path."""
        succ: dict[str, list[str]] = {n: [] for n in self.nodes}
        for u, v in self.pos_arrows:
            succ[u].append(v)
        reach = {}
        for start in self.nodes:
            seen: set[str] = set()
            stack = list(succ[start])
            while stack:
                v = stack.pop()
                if v not in seen:
                    seen.add(v)
                    stack.extend(succ[v])
            reach[start] = frozenset(seen)
        return reach

    def positive_path(self, start: str, end: str) -> Optional[tuple[str, ...]]:
        """Shortest positive path from ``start`` to ``end`` (BFS, node-order ties)."""
        succ: dict[str, list[str]] = {n: [] for n in self.nodes}
        for u, v in sorted(self.pos_arrows, key=lambda p: (self._rank[p[0]], self._rank[p[1]])):
            succ[u].append(v)
        parent: dict[str, Optional[str]] = {start: None}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in succ[u]:
                if v in parent:
                    continue
                parent[v] = u
                if v == end:
                    path = [v]
                    while parent[path[-1]] is not None:
                        path.append(parent[path[-1]])  # type: ignore[arg-type]
                    return tuple(reversed(path))
                queue.append(v)
        return None

    def reachable(self, source: str) -> frozenset[str]:
        seen = {source}
        stack = [source]
        while stack:
            for v in self.outgoing[stack.pop()]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return frozenset(seen)

    def topological_order(self) -> list[str]:
        """Kahn's algorithm; ties broken by declaration order."""
        indeg = {n: 0 for n in self.nodes}
        for _, v in self.pos_arrows | self.neg_arrows:
            indeg[v] += 1
        ready = [n for n in self.nodes if indeg[n] == 0]
        order = []
        while ready:
            ready.sort(key=self._rank.__getitem__)
            u = ready.pop(0)
            order.append(u)
            for v in self.outgoing[u]:
                indeg[v] -= 1
                if indeg[v] == 0:
                    ready.append(v)
        return order

    def random_topological_order(self, rng: random.Random) -> list[str]:
        indeg = {n: 0 for n in self.nodes}
        for _, v in self.pos_arrows | self.neg_arrows:
            indeg[v] += 1
        ready = [n for n in self.nodes if indeg[n] == 0]
        order = []
        while ready:
            u = ready.pop(rng.randrange(len(ready)))
            order.append(u)
            for v in self.outgoing[u]:
                indeg[v] -= 1
                if indeg[v] == 0:
                    ready.append(v)
        return order

    def without_arrow(self, u: str, v: str, positive: bool) -> "InheritanceDiagram":
        if positive:
            return build_diagram(self.nodes, self.pos_arrows - {(u, v)}, self.neg_arrows)
        return build_diagram(self.nodes, self.pos_arrows, self.neg_arrows - {(u, v)})

    def __str__(self) -> str:
        return format_diagram(self)


def build_diagram(
    nodes: Sequence[str],
    pos_arrows: Iterable[tuple[str, str]],
    neg_arrows: Iterable[tuple[str, str]] = (),
) -> InheritanceDiagram:
    """Validate and freeze a diagram.

    Raises ConflictingParallelArrows when a pair carries both polarities,
    MutualPositiveArrows for ``A -> B`` plus ``B -> A``, and CycleDetected for
    any other directed cycle (self-loops included).
    """
    nodes = tuple(nodes)
    seen: set[str] = set()
    for name in nodes:
        if not _NAME_RE.match(name):
            raise InputError(f"bad node name {name!r}")
        if name in seen:
            raise DuplicateName(f"duplicate node {name!r}")
        seen.add(name)
    pos = frozenset(tuple(a) for a in pos_arrows)
    neg = frozenset(tuple(a) for a in neg_arrows)
    for u, v in pos | neg:
        for name in (u, v):
            if name not in seen:
                raise UnknownName(f"arrow mentions undeclared node {name!r}")
    both = pos & neg
    if both:
        u, v = min(both)
        raise ConflictingParallelArrows(f"{u} has both a positive and a negative arrow to {v}")
    for u, v in sorted(pos):
        if u != v and (v, u) in pos:
            raise MutualPositiveArrows(
                f"{u} -> {v} and {v} -> {u}: each would have to be smaller than the other",
                [u, v, u],
            )
    cycle = _find_cycle(nodes, pos | neg)
    if cycle:
        raise CycleDetected("diagram has a cycle: " + " -> ".join(cycle), cycle)
    return InheritanceDiagram(nodes, pos, neg)


def _find_cycle(nodes: Sequence[str], arrows: frozenset[tuple[str, str]]) -> list[str]:
    succ: dict[str, list[str]] = {n: [] for n in nodes}
    for u, v in sorted(arrows):
        succ[u].append(v)
    state = dict.fromkeys(nodes, 0)
    for root in nodes:
        if state[root]:
            continue
        path = [root]
        stack = [iter(succ[root])]
        state[root] = 1
        while stack:
            for v in stack[-1]:
                if state[v] == 1:
                    return path[path.index(v):] + [v]
                if state[v] == 0:
                    state[v] = 1
                    path.append(v)
                    stack.append(iter(succ[v]))
                    break
            else:
                state[path.pop()] = 2
                stack.pop()
    return []


def parse_diagram(text: str) -> InheritanceDiagram:
    """Parse the diagram language::

        nodes U V X Y
        U -> V        # mostly in
        X -/> Y       # mostly not in
    """
    nodes: list[str] = []
    pos: list[tuple[str, str]] = []
    neg: list[tuple[str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head == "nodes":
            for name in rest.split():
                if not _NAME_RE.match(name):
                    raise ParseError(f"bad node name {name!r}", lineno)
                if name in nodes:
                    raise ParseError(f"node {name!r} declared twice", lineno)
                nodes.append(name)
            continue
        match = _ARROW_RE.match(line)
        if not match:
            raise ParseError(f"expected 'nodes ...', 'X -> Y' or 'X -/> Y', got {line!r}", lineno)
        u, arrow, v = match.groups()
        for name in (u, v):
            if name not in nodes:
                raise ParseError(f"undeclared node {name!r}", lineno)
        (pos if arrow == "->" else neg).append((u, v))
    if not nodes:
        raise ParseError("no 'nodes' line")
    return build_diagram(nodes, pos, neg)


def format_diagram(D: InheritanceDiagram) -> str:
    rank = {n: i for i, n in enumerate(D.nodes)}
    key = lambda a: (rank[a[0]], rank[a[1]])  # noqa: E731
    lines = ["nodes " + " ".join(D.nodes)]
    arrows = [(u, v, "->") for u, v in D.pos_arrows] + [(u, v, "-/>") for u, v in D.neg_arrows]
    for u, v, sym in sorted(arrows, key=lambda a: key(a)):
        lines.append(f"{u} {sym} {v}")
    return "\n".join(lines) + "\n"


# -- specificity --------------------------------------------------------------


@dataclass(frozen=True)
class Specificity:
    """``smaller`` is more specific than ``larger``, witnessed by ``conflict``.

    ``kind`` is ``"DIRECT"`` when a positive arrow ``smaller -> larger`` exists and
    ``"CHAIN"`` when only a longer positive path does.
    """

    smaller: str
    larger: str
    conflict: str
    kind: str
    path: tuple[str, ...]


def derive_specificity(D: InheritanceDiagram) -> list[Specificity]:
    """All triangles ``C =>+ B``, ``B`` and ``C`` pointing at ``A`` with opposite signs."""
    rank = {n: i for i, n in enumerate(D.nodes)}
    found = []
    for a in D.nodes:
        sources = D.incoming[a]
        for c, c_pos in sources:
            for b, b_pos in sources:
                if b_pos == c_pos or b not in D.positive_reach[c]:
                    continue
                kind = "DIRECT" if (c, b) in D.pos_arrows else "CHAIN"
                path = D.positive_path(c, b)
                assert path is not None
                found.append(Specificity(c, b, a, kind, path))
    found.sort(key=lambda s: (rank[s.smaller], rank[s.larger], rank[s.conflict]))
    return found


# -- inference ----------------------------------------------------------------


@dataclass(frozen=True)
class Cell:
    """One part of the source population with its membership in each node."""

    label: str
    fraction: Fraction
    membership: dict[str, Membership] = field(hash=False)

    def get(self, node: str) -> Membership:
        return self.membership.get(node, Membership.UNKNOWN)


@dataclass(frozen=True)
class TraceEvent:
    cell: str
    target: str
    kind: str  # applies | blocked | preempted | in | out | unknown | split | source
    source: Optional[str] = None
    positive: Optional[bool] = None
    by: Optional[str] = None

    def __str__(self) -> str:
        where = f"[cell {self.cell or 'root'}] {self.target}: "
        arrow = ""
        if self.source is not None:
            arrow = f"{self.source} {'->' if self.positive else '-/>'} {self.target}"
        if self.kind == "source":
            return f"{self.target}: source, IN by definition"
        if self.kind == "applies":
            return where + f"{arrow} applies"
        if self.kind == "blocked":
            return where + f"{arrow} not applicable ({self.source} is not IN this cell)"
        if self.kind == "preempted":
            return where + f"{arrow} preempted by more specific {self.by}"
        if self.kind == "split":
            return where + "unresolved conflict, split into IN and OUT halves"
        return where + self.kind.upper()


@dataclass(frozen=True)
class TargetResult:
    target: str
    status: Status
    in_fraction: Fraction
    out_fraction: Fraction
    unknown_fraction: Fraction

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "status": self.status.value,
            "in_fraction": _frac(self.in_fraction),
            "out_fraction": _frac(self.out_fraction),
            "unknown_fraction": _frac(self.unknown_fraction),
        }


def _frac(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


@dataclass(frozen=True)
class InferenceResult:
    source: str
    targets: dict[str, TargetResult] = field(hash=False)
    cells: tuple[Cell, ...]
    trace: tuple[TraceEvent, ...]

    def status(self, target: str) -> Status:
        return self.targets[target].status

    def canonical(self) -> tuple:
        """Order-free summary: target records plus the multiset of cells."""
        names = sorted(self.targets)
        cells = sorted(
            (c.fraction, tuple(c.get(n).value for n in names)) for c in self.cells
        )
        return tuple(self.targets[n] for n in names), tuple(cells)

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "targets": [t.to_dict() for t in self.targets.values()],
            "cells": [
                {
                    "label": c.label,
                    "fraction": _frac(c.fraction),
                    "membership": {k: v.value for k, v in c.membership.items()},
                }
                for c in self.cells
            ],
        }


def _status(in_f: Fraction, out_f: Fraction, unknown_f: Fraction) -> Status:
    if in_f == 1:
        return Status.IN_BIG
    if out_f == 1:
        return Status.OUT_BIG
    if unknown_f == 1:
        return Status.NONE
    if in_f > 0 and out_f > 0 and unknown_f == 0:
        return Status.SPLIT
    return Status.MIXED


def _check_order(D: InheritanceDiagram, order: Sequence[str]) -> list[str]:
    order = list(order)
    if sorted(order) != sorted(D.nodes):
        raise InputError("order must list every node exactly once")
    pos = {n: i for i, n in enumerate(order)}
    for u, v in D.pos_arrows | D.neg_arrows:
        if pos[u] > pos[v]:
            raise InputError(f"order is not topological: {u} must precede {v}")
    return order


def infer(
    D: InheritanceDiagram,
    source: str,
    *,
    order: Optional[Sequence[str]] = None,
    propagate_split: bool = True,
) -> InferenceResult:
    """Propagate the source population through the diagram.

    ``order`` overrides the processing order (any topological order gives the
    same result up to cell labels).  With ``propagate_split=False`` a node whose
    membership in a cell came from a split passes nothing further down.
    """
    D.check_node(source)
    order = D.topological_order() if order is None else _check_order(D, order)
    reach = D.reachable(source)

    # cells are (label, fraction, membership, nodes decided by a split)
    cells = [("", Fraction(1), {source: Membership.IN}, frozenset())]
    trace = [TraceEvent("", source, "source")]
    for t in order:
        if t == source or t not in reach:
            continue
        next_cells = []
        for label, frac, member, split_nodes in cells:
            applicable = []
            for u, positive in D.incoming[t]:
                if member.get(u) is Membership.IN and (propagate_split or u not in split_nodes):
                    applicable.append((u, positive))
                else:
                    trace.append(TraceEvent(label, t, "blocked", u, positive))
            survivors = []
            for u, positive in applicable:
                by = next(
                    (u2 for u2, p2 in applicable if p2 != positive and u in D.positive_reach[u2]),
                    None,
                )
                if by is None:
                    survivors.append(positive)
                    trace.append(TraceEvent(label, t, "applies", u, positive))
                else:
                    trace.append(TraceEvent(label, t, "preempted", u, positive, by))
            polarities = set(survivors)
            if polarities == {True, False}:
                trace.append(TraceEvent(label, t, "split"))
                half = frac / 2
                marked = split_nodes | {t}
                next_cells.append((label + "0", half, {**member, t: Membership.IN}, marked))
                next_cells.append((label + "1", half, {**member, t: Membership.OUT}, marked))
                continue
            if polarities == {True}:
                member = {**member, t: Membership.IN}
                trace.append(TraceEvent(label, t, "in"))
            elif polarities == {False}:
                member = {**member, t: Membership.OUT}
                trace.append(TraceEvent(label, t, "out"))
            elif D.incoming[t]:
                trace.append(TraceEvent(label, t, "unknown"))
            next_cells.append((label, frac, member, split_nodes))
        cells = next_cells

    frozen = tuple(
        Cell(label, frac, {n: member.get(n, Membership.UNKNOWN) for n in D.nodes})
        for label, frac, member, _ in cells
    )
    targets = {}
    for t in D.nodes:
        if t == source:
            continue
        tally = {m: Fraction(0) for m in Membership}
        for c in frozen:
            tally[c.get(t)] += c.fraction
        ins, outs, unknown = tally[Membership.IN], tally[Membership.OUT], tally[Membership.UNKNOWN]
        targets[t] = TargetResult(t, _status(ins, outs, unknown), ins, outs, unknown)
    return InferenceResult(source, targets, frozen, tuple(trace))


def _ancestors(D: InheritanceDiagram, target: str) -> set[str]:
    preds: dict[str, list[str]] = {n: [] for n in D.nodes}
    for u, v in D.pos_arrows | D.neg_arrows:
        preds[v].append(u)
    seen = {target}
    stack = [target]
    while stack:
        for u in preds[stack.pop()]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return seen


def explain(D: InheritanceDiagram, source: str, target: str, **options) -> list[TraceEvent]:
    """The part of the inference trace that decides ``target``.

    Includes the decisions for every node the target depends on, in the order
    they were made.
    """
    D.check_node(target)
    result = infer(D, source, **options)
    if target == source:
        return [TraceEvent("", source, "source")]
    relevant = _ancestors(D, target) - {source}
    return [e for e in result.trace if e.target in relevant]


# -- generators ---------------------------------------------------------------


def random_diagram(rng: random.Random, n_nodes: int, max_arrows: int) -> InheritanceDiagram:
    """A random valid diagram: arrows only go forward in a shuffled node order."""
    names = [chr(ord("A") + i) for i in range(n_nodes)]
    order = names[:]
    rng.shuffle(order)
    pairs = [(order[i], order[j]) for i in range(n_nodes) for j in range(i + 1, n_nodes)]
    chosen = rng.sample(pairs, min(len(pairs), rng.randint(0, max_arrows)))
    pos = [p for p in chosen if rng.random() < 0.6]
    neg = [p for p in chosen if p not in pos]
    return build_diagram(names, pos, neg)
