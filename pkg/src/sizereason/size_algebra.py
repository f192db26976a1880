"""Big/medium/small subsets generated by the minimal-element operator.

Relative to a nonempty reference set ``X`` a subset ``A`` is BIG when it contains
every minimal element of ``X``, SMALL when it contains none of them, and MEDIUM
otherwise.  On top of that classification live the comparisons ``less`` (small
versus big) and ``less_prime`` (one of the two sides may be medium), the
coherence conditions, and exhaustive verifiers for the facts that connect
properties of the preference relation with properties of the size relations.

All sets are bitmasks over ``S.elements``.  The verifiers quantify over every
subset of the structure, so they are meant for small structures (n <= 7 keeps
each check well under a second).
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Optional, Sequence

import numpy as np

from .bits import is_subset, iter_bits, submasks, supersets_within
from .errors import EmptyReference, NotASubset, NotRanked
from .prefstruct import (
    PreferentialStructure,
    _ranks,
    enumerate_structures,
    is_ranked,
    is_smooth,
    random_structure,
)


class SizeClass(enum.Enum):
    BIG = "BIG"
    MEDIUM = "MEDIUM"
    SMALL = "SMALL"


class FactId(str, enum.Enum):
    SUBSET = "SUBSET"
    COHER = "COHER"
    LESS_TRANS = "LESS_TRANS"
    RK = "RK"
    TRANS_RANK = "TRANS_RANK"
    LESS_M = "LESS_M"
    TRIANGLE_COROLLARY = "TRIANGLE_COROLLARY"


ALL_FACTS = tuple(FactId)


@dataclass(frozen=True)
class SizeVerdict:
    """Outcome of an exhaustive check.

    ``witness`` maps role names (``"X"``, ``"A"``, ...) to subset bitmasks and is
    present exactly when the check failed.  A verdict whose hypothesis did not
    hold is ``vacuous`` and counts as holding.
    """

    check: str
    holds: bool
    witness: Optional[dict[str, int]] = None
    vacuous: bool = False
    note: str = ""

    def __post_init__(self):
        if self.holds == (self.witness is not None):
            raise ValueError("a verdict fails exactly when it carries a witness")

    @classmethod
    def ok(cls, check, note=""):
        return cls(check, True, note=note)

    @classmethod
    def fail(cls, check, note="", **witness):
        return cls(check, False, dict(witness), note=note)

    @classmethod
    def vacuously(cls, check, note):
        return cls(check, True, vacuous=True, note=note)

    @property
    def status(self) -> str:
        if not self.holds:
            return "FAILS"
        return "VACUOUS" if self.vacuous else "HOLDS"

    def to_dict(self, S: PreferentialStructure) -> dict:
        out = {"check": self.check, "status": self.status, "holds": self.holds}
        if self.witness is not None:
            out["witness"] = {k: S.names(v) for k, v in self.witness.items()}
        if self.note:
            out["note"] = self.note
        return out


# -- primitive size notions ---------------------------------------------------


# integer class codes for the hot loops of the verifiers
_SMALL, _MEDIUM, _BIG = 0, 1, 2
_WEAK = ((False, True, True), (False, False, True), (False, False, False))  # [a][b]


def _code(mu_x: int, a: int) -> int:
    if mu_x & ~a == 0:
        return _BIG
    return _SMALL if mu_x & a == 0 else _MEDIUM


def _class_of(mu_x: int, a: int) -> SizeClass:
    if mu_x & ~a == 0:
        return SizeClass.BIG
    if mu_x & a == 0:
        return SizeClass.SMALL
    return SizeClass.MEDIUM


def classify(S: PreferentialStructure, X: int, A: int) -> SizeClass:
    """Size of ``A`` inside the reference set ``X``."""
    S.check_subset(X)
    S.check_subset(A)
    if not X:
        raise EmptyReference("reference set is empty")
    if not is_subset(A, X):
        raise NotASubset("A is not a subset of X")
    return _class_of(S.mu(X), A)


def _reference(S: PreferentialStructure, A: int, B: int, X: Optional[int]) -> int:
    S.check_subset(A)
    S.check_subset(B)
    if X is None:
        X = A | B
    else:
        S.check_subset(X)
        if not is_subset(A | B, X):
            raise NotASubset("A and B must be subsets of X")
    if not X:
        raise EmptyReference("reference set is empty")
    return X


def less(S: PreferentialStructure, A: int, B: int, X: Optional[int] = None) -> bool:
    """``A`` is small and ``B`` big in ``X`` (default ``A ∪ B``)."""
    X = _reference(S, A, B, X)
    m = S.mu(X)
    return _class_of(m, A) is SizeClass.SMALL and _class_of(m, B) is SizeClass.BIG


def less_prime(S: PreferentialStructure, A: int, B: int, X: Optional[int] = None) -> bool:
    """Weak comparison: ``B`` big and ``A`` not big, or ``B`` medium and ``A`` small."""
    X = _reference(S, A, B, X)
    m = S.mu(X)
    return _less_prime(_class_of(m, A), _class_of(m, B))


def _less_prime(ca: SizeClass, cb: SizeClass) -> bool:
    if cb is SizeClass.BIG:
        return ca is not SizeClass.BIG
    if cb is SizeClass.MEDIUM:
        return ca is SizeClass.SMALL
    return False


def small_degree(S: PreferentialStructure, A: int, B: int) -> int:
    """How many times over ``A`` is small in ``B``.

    0 when ``A`` is not small in ``B``; otherwise the length ``k`` of the longest
    chain ``B = C_0 ⊇ C_1 ⊇ ... ⊇ C_k = A`` in which every link is small in the
    previous one.
    """
    S.check_subset(A)
    S.check_subset(B)
    if not B:
        raise EmptyReference("reference set is empty")
    if not is_subset(A, B):
        raise NotASubset("A is not a subset of B")
    memo: dict[int, int] = {}

    def longest(c: int) -> int:
        if c in memo:
            return memo[c]
        m = S.mu(c)
        if A & m:
            best = 0
        else:
            best = 1
            # an intermediate link must itself be small in c and strictly contain A
            for mid in supersets_within(A, c & ~m):
                if mid != A:
                    best = max(best, 1 + longest(mid))
        memo[c] = best
        return best

    return longest(B)


# -- coherence and preferential rules ----------------------------------------


def _nonempty(n: int) -> range:
    return range(1, 1 << n)


@lru_cache(maxsize=256)
def check_coh1(S: PreferentialStructure) -> SizeVerdict:
    """X ⊆ Y implies every small subset of X is small in Y.

    It is enough to test the largest small subset, ``X - mu(X)``.
    """
    mu = S.mu_table
    for y in _nonempty(S.n):
        for x in submasks(y):
            if x and _class_of(mu[y], x & ~mu[x]) is not SizeClass.SMALL:
                return SizeVerdict.fail("COH1", X=x, Y=y, A=x & ~mu[x])
    return SizeVerdict.ok("COH1")


@lru_cache(maxsize=256)
def check_coh2(S: PreferentialStructure) -> SizeVerdict:
    """A, B small in X and disjoint implies A small in X - B."""
    mu = S.mu_table
    for x in _nonempty(S.n):
        top = x & ~mu[x]
        for b in submasks(top):
            a = top & ~b
            rest = x & ~b
            if _class_of(mu[rest], a) is not SizeClass.SMALL:
                return SizeVerdict.fail("COH2", X=x, A=a, B=b)
    return SizeVerdict.ok("COH2")


@lru_cache(maxsize=256)
def check_muPR(S: PreferentialStructure) -> SizeVerdict:
    mu = S.mu_table
    for y in _nonempty(S.n):
        for x in submasks(y):
            if x and mu[y] & x & ~mu[x]:
                return SizeVerdict.fail("MU_PR", X=x, Y=y)
    return SizeVerdict.ok("MU_PR")


@lru_cache(maxsize=256)
def check_muCUM(S: PreferentialStructure) -> SizeVerdict:
    mu = S.mu_table
    for x in _nonempty(S.n):
        for y in supersets_within(mu[x], x):
            if mu[y] != mu[x]:
                return SizeVerdict.fail("MU_CUM", X=x, Y=y)
    return SizeVerdict.ok("MU_CUM")


@lru_cache(maxsize=256)
def check_muEQ(S: PreferentialStructure) -> SizeVerdict:
    mu = S.mu_table
    for y in _nonempty(S.n):
        for x in submasks(y):
            if x & mu[y] and mu[x] != mu[y] & x:
                return SizeVerdict.fail("MU_EQ", X=x, Y=y)
    return SizeVerdict.ok("MU_EQ")


def check_remark_less(S: PreferentialStructure) -> SizeVerdict:
    """A small in A ∪ B implies B big in A ∪ B."""
    mu = S.mu_table
    for a in range(1 << S.n):
        for b in range(1 << S.n):
            u = a | b
            if not u:
                continue
            if (_class_of(mu[u], a) is SizeClass.SMALL
                    and _class_of(mu[u], b) is not SizeClass.BIG):
                return SizeVerdict.fail("REMARK_LESS", A=a, B=b)
    return SizeVerdict.ok("REMARK_LESS")


def remark_converse_witness(S: PreferentialStructure) -> Optional[tuple[int, int]]:
    """A pair with B big in A ∪ B but A not small there; (A, A) always works."""
    mu = S.mu_table
    for a in range(1, 1 << S.n):
        for b in range(1 << S.n):
            u = a | b
            if (_class_of(mu[u], b) is SizeClass.BIG
                    and _class_of(mu[u], a) is not SizeClass.SMALL):
                return (a, b)
    return None


def find_relative_weak_case_b(S: PreferentialStructure) -> Optional[tuple[int, int, int]]:
    """Find ``(A, B, X)`` with ``X`` strictly larger than ``A ∪ B`` where ``A`` is
    small and ``B`` medium in ``X``.

    That clause of ``less_prime`` can never fire when ``X = A ∪ B``.
    """
    mu = S.mu_table
    for x in _nonempty(S.n):
        for b in submasks(x):
            if _class_of(mu[x], b) is not SizeClass.MEDIUM:
                continue
            for a in submasks(x & ~mu[x]):
                if a | b != x:
                    return (a, b, x)
    return None


# -- exhaustive fact verification ---------------------------------------------


class _Tables:
    """Row tables for the size relations of one structure.

    ``less_rows[a]`` is an integer whose bit ``b`` is set iff ``a < b`` (reference
    set ``a ∪ b``); ``weak_rows`` likewise for ``less_prime``.
    """

    def __init__(self, S: PreferentialStructure):
        self.S = S
        self.mu = S.mu_table
        idx = np.arange(1 << S.n, dtype=np.int64)
        a, b = idx[:, None], idx[None, :]
        m = np.asarray(self.mu, dtype=np.int64)[a | b]
        nonempty = (a | b) != 0
        small_a, big_a = (m & a) == 0, (m & ~a) == 0
        small_b, big_b = (m & b) == 0, (m & ~b) == 0
        medium_b = ~small_b & ~big_b
        less = nonempty & small_a & big_b
        weak = nonempty & ((big_b & ~big_a) | (medium_b & small_a))
        self.less_rows = _pack_rows(less)
        self.weak_rows = _pack_rows(weak)

    def less_cols(self) -> list[int]:
        size = 1 << self.S.n
        cols = [0] * size
        for a, row in enumerate(self.less_rows):
            for b in iter_bits(row):
                cols[b] |= 1 << a
        return cols


def _pack_rows(matrix: np.ndarray) -> list[int]:
    # row i -> integer whose bit j is matrix[i, j]
    packed = np.packbits(matrix, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


@lru_cache(maxsize=32)
def _tables(S: PreferentialStructure) -> _Tables:
    return _Tables(S)


def _lowest(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


def _check_transitive_rows(rows: Sequence[int], check: str) -> SizeVerdict:
    for a, row in enumerate(rows):
        for b in iter_bits(row):
            gap = rows[b] & ~row
            if gap:
                return SizeVerdict.fail(check, A=a, B=b, C=_lowest(gap))
    return SizeVerdict.ok(check)


def _verify_subset(S: PreferentialStructure) -> SizeVerdict:
    t = _tables(S)
    mu = t.mu
    # (1) X big in X' : X ∩ A big in X  <=>  X' ∩ A big in X'
    for xp in _nonempty(S.n):
        for x in supersets_within(mu[xp], xp):
            for a in submasks(xp):
                lhs = mu[x] & ~(x & a) == 0
                rhs = mu[xp] & ~(xp & a) == 0
                if lhs != rhs:
                    return SizeVerdict.fail("SUBSET", note="part 1", X=x, Xp=xp, A=a)
    # (2) replacing either side by a big subset of it never changes "<".
    # Single substitutions on both sides give all four equivalences.
    rows = t.less_rows
    for x in _nonempty(S.n):
        for xp in supersets_within(mu[x], x):
            diff = rows[x] ^ rows[xp]
            if diff:
                return SizeVerdict.fail("SUBSET", note="part 2, left", X=x, Xp=xp, Y=_lowest(diff))
    cols = t.less_cols()
    for y in _nonempty(S.n):
        for yp in supersets_within(mu[y], y):
            diff = cols[y] ^ cols[yp]
            if diff:
                return SizeVerdict.fail("SUBSET", note="part 2, right", X=_lowest(diff), Y=y, Yp=yp)
    return SizeVerdict.ok("SUBSET")


def _verify_coher(S: PreferentialStructure) -> SizeVerdict:
    coh1, coh2 = check_coh1(S), check_coh2(S)
    pr, cum = check_muPR(S), check_muCUM(S)
    if coh1.holds != pr.holds:
        bad = coh1 if not coh1.holds else pr
        return SizeVerdict.fail("COHER", note="Coh1 and muPR disagree", **bad.witness)
    if cum.holds and not coh2.holds:
        return SizeVerdict.fail("COHER", note="muCUM holds but Coh2 fails", **coh2.witness)
    if coh1.holds and coh2.holds and not cum.holds:
        return SizeVerdict.fail("COHER", note="Coh1+Coh2 hold but muCUM fails", **cum.witness)
    return SizeVerdict.ok("COHER")


def _set_ranks(S: PreferentialStructure) -> list[int]:
    # rank of a nonempty set := rank of (any of) its minimal elements
    elem = _ranks(S)
    mu = S.mu_table
    out = [-1] * (1 << S.n)
    for a in _nonempty(S.n):
        out[a] = elem[_lowest(mu[a])]
    return out


def _proper_subset(a: int, b: int) -> bool:
    return a != b and a & ~b == 0


def _verify_rk(S: PreferentialStructure) -> SizeVerdict:
    mu = S.mu_table
    rk = _set_ranks(S)
    for x in _nonempty(S.n):
        mx, rx = mu[x], rk[x]
        subs = [(a, _code(mx, a), rk[a], mu[a]) for a in submasks(x) if a]
        for a, ca, ra, ma in subs:
            for b, cb, rb, mb in subs:
                lhs = _WEAK[ca][cb]
                rhs = (rb < ra and rb == rx) or (
                    ra == rb == rx and _proper_subset(ma, mb) and mb == mx
                )
                if lhs != rhs:
                    return SizeVerdict.fail("RK", note="relative form", A=a, B=b, X=x)
    weak = _tables(S).weak_rows
    for a in _nonempty(S.n):
        ra, ma, row = rk[a], mu[a], weak[a]
        for b in _nonempty(S.n):
            lhs = bool(row >> b & 1)
            rhs = rk[b] < ra or (ra == rk[b] and _proper_subset(ma, mu[b]))
            if lhs != rhs:
                return SizeVerdict.fail("RK", note="absolute form", A=a, B=b)
    return SizeVerdict.ok("RK")


def _verify_less_m(S: PreferentialStructure) -> SizeVerdict:
    mu = S.mu_table
    rows = _tables(S).less_rows
    size = 1 << S.n
    medium = [0] * size
    for y in range(1, size):
        for yp in submasks(y):
            if _class_of(mu[y], yp) is SizeClass.MEDIUM:
                medium[y] |= 1 << yp
    for x in range(size):
        reach = 0
        for y in iter_bits(rows[x]):
            reach |= medium[y]
        if not reach:
            continue
        # part 1 is the case xp = x; part 2 ranges over the non-big subsets of x
        candidates = [x]
        if x:
            candidates += [xp for xp in submasks(x) if _class_of(mu[x], xp) is not SizeClass.BIG]
        for xp in candidates:
            gap = reach & ~rows[xp]
            if gap:
                yp = _lowest(gap)
                y = next(y for y in iter_bits(rows[x]) if medium[y] >> yp & 1)
                return SizeVerdict.fail("LESS_M", X=x, Xp=xp, Y=y, Yp=yp)
    return SizeVerdict.ok("LESS_M")


def _verify_triangle(S: PreferentialStructure) -> SizeVerdict:
    """Arrows read semantically: C → B iff mu(C) ⊆ B, C ↛ A iff mu(C) ∩ A = ∅.

    With B → A and C ↛ A for some A (possible iff mu(B) ∩ mu(C) = ∅), C → B must
    give C < B, and C → B together with B → C must be impossible.
    """
    mu = S.mu_table
    rows = _tables(S).less_rows
    for b in _nonempty(S.n):
        for c in _nonempty(S.n):
            if mu[b] & mu[c] or not is_subset(mu[c], b):
                continue
            if not rows[c] >> b & 1:
                return SizeVerdict.fail("TRIANGLE_COROLLARY", note="C → B but not C < B",
                                        A=mu[b], B=b, C=c)
            if is_subset(mu[b], c):
                return SizeVerdict.fail("TRIANGLE_COROLLARY", note="mutual arrows",
                                        A=mu[b], B=b, C=c)
    return SizeVerdict.ok("TRIANGLE_COROLLARY")


def verify_fact(
    S: PreferentialStructure, fact_id: FactId | str, check_hypothesis: bool = True
) -> SizeVerdict:
    """Exhaustively check one fact on ``S``.

    With ``check_hypothesis`` (the default) a fact whose hypothesis fails on ``S``
    yields a vacuous verdict; RK and TRANS_RANK raise NotRanked instead.  With
    ``check_hypothesis=False`` the conclusion is checked unconditionally, which
    is how the known counterexamples outside the hypothesis class are exhibited.
    """
    fact = FactId(fact_id)
    if check_hypothesis and not hypothesis_holds(S, fact):
        if fact in (FactId.RK, FactId.TRANS_RANK):
            raise NotRanked(f"{fact.value} needs a ranked structure")
        return SizeVerdict.vacuously(fact.value, _HYPOTHESIS[fact] + " fails")
    return _VERIFIERS[fact](S)


_HYPOTHESIS = {
    FactId.SUBSET: "Coh1+Coh2",
    FactId.COHER: "none",
    FactId.LESS_TRANS: "smoothness",
    FactId.RK: "rankedness",
    FactId.TRANS_RANK: "rankedness",
    FactId.LESS_M: "rankedness",
    FactId.TRIANGLE_COROLLARY: "Coh1",
}


def hypothesis_holds(S: PreferentialStructure, fact_id: FactId | str) -> bool:
    fact = FactId(fact_id)
    if fact is FactId.SUBSET:
        return check_coh1(S).holds and check_coh2(S).holds
    if fact is FactId.LESS_TRANS:
        return is_smooth(S)
    if fact in (FactId.RK, FactId.TRANS_RANK, FactId.LESS_M):
        return is_ranked(S)
    if fact is FactId.TRIANGLE_COROLLARY:
        return check_coh1(S).holds
    return True


_VERIFIERS: dict[FactId, Callable[[PreferentialStructure], SizeVerdict]] = {
    FactId.SUBSET: _verify_subset,
    FactId.COHER: _verify_coher,
    FactId.LESS_TRANS: lambda S: _check_transitive_rows(_tables(S).less_rows, "LESS_TRANS"),
    FactId.RK: _verify_rk,
    FactId.TRANS_RANK: lambda S: _check_transitive_rows(_tables(S).weak_rows, "TRANS_RANK"),
    FactId.LESS_M: _verify_less_m,
    FactId.TRIANGLE_COROLLARY: _verify_triangle,
}


# -- sweeps -------------------------------------------------------------------

EXHAUSTIVE_MAX = 4


def sweep_corpus(max_size: int, samples: int, seed: int = 42) -> Iterator[PreferentialStructure]:
    """Every labeled acyclic structure up to ``min(max_size, 4)`` elements, then
    ``samples`` seeded random structures with up to ``max_size`` elements.

    The random part cycles through arbitrary, transitively closed and ranked
    draws so that each hypothesis class is populated.
    """
    for n in range(1, min(max_size, EXHAUSTIVE_MAX) + 1):
        yield from enumerate_structures(n)
    if max_size <= EXHAUSTIVE_MAX:
        return
    rng = random.Random(seed)
    kinds = ("any", "transitive", "ranked")
    for i in range(samples):
        n = rng.randint(EXHAUSTIVE_MAX + 1, max_size)
        yield random_structure(rng, n, kinds[i % len(kinds)])


@dataclass
class FactTally:
    fact: str
    checked: int = 0
    vacuous: int = 0
    not_applicable: int = 0
    counterexamples: list = field(default_factory=list)

    def to_dict(self, limit: int = 3) -> dict:
        return {
            "fact": self.fact,
            "checked": self.checked,
            "vacuous": self.vacuous,
            "not_applicable": self.not_applicable,
            "counterexamples": len(self.counterexamples),
            "examples": self.counterexamples[:limit],
        }


def run_sweep(
    structures: Iterable[PreferentialStructure],
    facts: Sequence[FactId | str] = ALL_FACTS,
    unconditional: bool = False,
) -> dict[str, FactTally]:
    """Check ``facts`` on every structure.

    In the default mode a counterexample means a fact failed on its own
    hypothesis class.  With ``unconditional`` hypotheses are ignored; failures
    are still collected, tagged with whether the hypothesis held.
    """
    facts = [FactId(f) for f in facts]
    tallies = {f.value: FactTally(f.value) for f in facts}
    for S in structures:
        for f in facts:
            tally = tallies[f.value]
            try:
                verdict = verify_fact(S, f, check_hypothesis=not unconditional)
            except NotRanked:
                tally.not_applicable += 1
                continue
            tally.checked += 1
            if verdict.vacuous:
                tally.vacuous += 1
            elif not verdict.holds:
                entry = {"structure": _compact(S), **verdict.to_dict(S)}
                if unconditional:
                    entry["hypothesis_holds"] = hypothesis_holds(S, f)
                tally.counterexamples.append(entry)
    return tallies


def _compact(S: PreferentialStructure) -> dict:
    order = {name: i for i, name in enumerate(S.elements)}
    pairs = sorted(S.prefers, key=lambda p: (order[p[0]], order[p[1]]))
    return {"elements": list(S.elements), "prefers": [list(p) for p in pairs]}
