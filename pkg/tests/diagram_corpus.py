"""Diagram corpora and the preemption cross-check shared by several test files."""
import itertools
import random
from collections import defaultdict

from sizereason.errors import CycleDetected
from sizereason.inheritance import build_diagram, derive_specificity, infer, random_diagram

FIXTURE_DIAGRAMS = ("tweety", "nixon", "extended_nixon", "up_down", "two_nixon")


def all_small_diagrams(n_nodes):
    """Every valid diagram on ``n_nodes`` labeled nodes.

    Each unordered pair carries nothing or one arrow of either direction and
    sign; cyclic combinations are dropped.
    """
    names = [chr(ord("A") + i) for i in range(n_nodes)]
    pairs = list(itertools.combinations(names, 2))
    for choice in itertools.product(range(5), repeat=len(pairs)):
        pos, neg = [], []
        for (u, v), c in zip(pairs, choice):
            if c == 1:
                pos.append((u, v))
            elif c == 2:
                neg.append((u, v))
            elif c == 3:
                pos.append((v, u))
            elif c == 4:
                neg.append((v, u))
        try:
            yield build_diagram(names, pos, neg)
        except CycleDetected:
            continue


def sampled_diagrams(count, seed=42, max_nodes=5, max_arrows=8):
    rng = random.Random(seed)
    for _ in range(count):
        yield random_diagram(rng, rng.randint(1, max_nodes), max_arrows)


def preemption_mismatches(D):
    """Compare the engine's preemption events with the specificity triangles.

    For every source and every cell, an arrow ``u -> t`` is preempted exactly
    when some other applicable arrow into ``t`` of the opposite sign comes from
    a node that the specificity derivation places below ``u`` with conflict
    ``t``.  Returns a list of human-readable mismatches (empty when all agree).
    """
    triangles = {(s.smaller, s.larger, s.conflict) for s in derive_specificity(D)}
    problems = []
    for source in D.nodes:
        result = infer(D, source)
        applicable = defaultdict(dict)
        preempted = defaultdict(set)
        for e in result.trace:
            if e.kind in ("applies", "preempted"):
                applicable[(e.cell, e.target)][e.source] = e.positive
            if e.kind == "preempted":
                preempted[(e.cell, e.target)].add(e.source)
                if (e.by, e.source, e.target) not in triangles:
                    problems.append(f"{source}: {e} has no specificity triangle")
        for key, arrows in applicable.items():
            t = key[1]
            for u, sign in arrows.items():
                expected = any(
                    (c, u, t) in triangles for c, s in arrows.items() if s != sign
                )
                if expected != (u in preempted[key]):
                    problems.append(f"{source}: cell {key[0]!r} arrow {u}->{t} expected "
                                    f"preempted={expected}")
    return problems
