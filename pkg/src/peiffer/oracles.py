"""Membership oracles for normal closures of relator families.

Normal-closure membership is undecidable in general, so every oracle is
either exact on a restricted class or a semi-decision procedure:

* ``FreeQuotient`` — exact when every relator of the target families is a
  single generator letter: kill those generators and test free triviality.
  A positive answer carries a certificate sequence assembled by
  conjugate-collection; a negative answer carries the surviving image.
* ``BoundedConjugateSearch`` — best-first search for a certificate; answers
  yes or unknown.  An abelianized lattice test supplies cheap no-answers.
* ``FiniteQuotientTests`` — homomorphisms into finite permutation groups that
  kill the target relators; a nontrivial image is a no-witness.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .errors import StrategyInapplicable
from .presentation import Presentation
from .sequences import ConjTerm, Sequence, product
from .words import EMPTY, Word, free_reduce, inverse


@dataclass(frozen=True)
class RClosure:
    """Normal closure of family i's relators."""

    family: int


@dataclass(frozen=True)
class NClosure:
    """Normal closure of the union of the other families' relators."""

    family: int


Target = RClosure | NClosure


def target_relators(p: Presentation, target: Target) -> frozenset[int]:
    if isinstance(target, RClosure):
        return p.family(target.family)
    return p.complement_family(target.family)


@dataclass(frozen=True)
class Yes:
    certificate: Sequence


@dataclass(frozen=True)
class No:
    witness: str


@dataclass(frozen=True)
class Unknown:
    reason: str = "budget exhausted"


MembershipAnswer = Yes | No | Unknown


# ---------------------------------------------------------------------------
# strategies


@dataclass(frozen=True)
class FreeQuotient:
    """Exact test by killing single-generator relators."""


@dataclass(frozen=True)
class BoundedConjugateSearch:
    max_terms: int = 12
    max_states: int = 20_000


@dataclass(frozen=True)
class FiniteQuotientTests:
    """Tables mapping each generator name to a permutation (tuple of images)."""

    tables: tuple[dict[str, tuple[int, ...]], ...] = field(default_factory=tuple)


Strategy = FreeQuotient | BoundedConjugateSearch | FiniteQuotientTests


@dataclass(frozen=True)
class MembershipOracle:
    strategy: Strategy


def _killed_generators(p: Presentation, rids: frozenset[int]) -> dict[int, tuple[int, int]] | None:
    """Map generator -> (relator id, orientation) if every target relator is one letter."""
    killed: dict[int, tuple[int, int]] = {}
    for rid in rids:
        w = p.relator_word(rid)
        if len(w) != 1:
            return None
        letter = w[0]
        killed[abs(letter)] = (rid, 1 if letter > 0 else -1)
    return killed


def _collect_conjugates(
    w: Word, killed: dict[int, tuple[int, int]]
) -> tuple[Sequence, Word]:
    """Conjugate-collection: ``w ≃ (Π terms) · residual`` with residual the kill-image.

    Scanning left to right, each killed letter at prefix K contributes the
    term ``(K, relator, ±1)``; the kept letters accumulate into K.
    """
    terms: list[ConjTerm] = []
    kept: list[int] = []
    for letter in w:
        g = abs(letter)
        if g in killed:
            rid, orient = killed[g]
            sign = (1 if letter > 0 else -1) * orient
            terms.append(ConjTerm(tuple(kept), rid, sign))
        else:
            if kept and kept[-1] == -letter:
                kept.pop()
            else:
                kept.append(letter)
    return tuple(terms), tuple(kept)


def _free_quotient(p: Presentation, w: Word, target: Target) -> MembershipAnswer:
    rids = target_relators(p, target)
    killed = _killed_generators(p, rids)
    if killed is None:
        raise StrategyInapplicable(
            "FreeQuotient needs every target relator to be a single generator"
        )
    terms, residual = _collect_conjugates(free_reduce(w), killed)
    if residual == EMPTY:
        return Yes(terms)
    return No(
        "killing the target generators leaves the nontrivial word "
        + p.text(residual)
    )


def _abelianized_no(p: Presentation, w: Word, rids: frozenset[int]) -> No | None:
    """No-witness when w's exponent vector is outside the relator lattice."""
    ngen = len(p.generators)

    def expvec(u: Word) -> list[int]:
        v = [0] * ngen
        for letter in u:
            v[abs(letter) - 1] += 1 if letter > 0 else -1
        return v

    basis = [expvec(p.relator_word(rid)) for rid in sorted(rids)]
    v = expvec(w)
    # integer Gaussian elimination: reduce v against a Hermite-style basis
    rows = [row[:] for row in basis]
    for col in range(ngen):
        pivots = [r for r in rows if r[col] != 0 and all(x == 0 for x in r[:col])]
        while len(pivots) > 1:
            pivots.sort(key=lambda r: abs(r[col]))
            small = pivots[0]
            for r in pivots[1:]:
                q = r[col] // small[col]
                for k in range(ngen):
                    r[k] -= q * small[k]
            pivots = [r for r in pivots if r[col] != 0 and all(x == 0 for x in r[:col])]
        if pivots:
            piv = pivots[0]
            if v[col] % piv[col] == 0:
                q = v[col] // piv[col]
                for k in range(ngen):
                    v[k] -= q * piv[k]
    if any(v):
        return No("exponent vector lies outside the abelianized relator lattice")
    return None


def _bounded_search(
    p: Presentation, w: Word, target: Target, cfg: BoundedConjugateSearch
) -> MembershipAnswer:
    rids = sorted(target_relators(p, target))
    neg = _abelianized_no(p, w, frozenset(rids))
    if neg is not None:
        return neg
    start = free_reduce(w)
    if start == EMPTY:
        return Yes(())
    # best-first on remaining length; a move strips one conjugated relator
    # from the front: w = X·Y  ≃  (X r^ε X⁻¹) · reduce(X r^-ε Y)
    heap: list[tuple[int, int, Word, Sequence]] = [(len(start), 0, start, ())]
    seen: set[Word] = {start}
    states = 0
    while heap:
        _, depth, cur, terms = heapq.heappop(heap)
        if depth >= cfg.max_terms:
            continue
        for split in range(len(cur) + 1):
            x, y = cur[:split], cur[split:]
            for rid in rids:
                r = p.relator_word(rid)
                for eps, core in ((1, inverse(r)), (-1, r)):
                    rest = free_reduce(x + core + y)
                    if rest in seen:
                        continue
                    states += 1
                    if states > cfg.max_states:
                        return Unknown("conjugate-search state budget exhausted")
                    cand = terms + (ConjTerm(x, rid, eps),)
                    if rest == EMPTY:
                        return Yes(cand)
                    seen.add(rest)
                    heapq.heappush(heap, (len(rest), depth + 1, rest, cand))
    return Unknown("conjugate-search move budget exhausted")


def _apply_perm(perm: tuple[int, ...], point: int) -> int:
    return perm[point]


def _perm_of_word(w: Word, gens: tuple[str, ...], table: dict[str, tuple[int, ...]]) -> tuple[int, ...]:
    degree = len(next(iter(table.values()))) if table else 1
    images = list(range(degree))
    for letter in w:
        name = gens[abs(letter) - 1]
        perm = table[name]
        if letter < 0:
            inv = [0] * len(perm)
            for i, j in enumerate(perm):
                inv[j] = i
            perm = tuple(inv)
        images = [perm[i] for i in images]
    return tuple(images)


def _finite_quotients(
    p: Presentation, w: Word, target: Target, cfg: FiniteQuotientTests
) -> MembershipAnswer:
    rids = target_relators(p, target)
    for idx, table in enumerate(cfg.tables):
        if set(table) != set(p.generators):
            continue
        degree = len(next(iter(table.values())))
        identity = tuple(range(degree))
        if any(_perm_of_word(p.relator_word(rid), p.generators, table) != identity for rid in rids):
            continue  # the quotient does not kill the target; useless here
        if _perm_of_word(w, p.generators, table) != identity:
            return No(f"finite quotient #{idx} separates the word from the closure")
    return Unknown("no finite quotient in the list separates the word")


def membership(
    oracle: MembershipOracle, p: Presentation, w: Word, target: Target
) -> MembershipAnswer:
    """Decide (or semi-decide) membership of ``w`` in the target normal closure.

    A ``Yes`` carries a certificate sequence over the target families whose
    product is freely equal to ``w``.
    """
    if isinstance(oracle.strategy, FreeQuotient):
        answer = _free_quotient(p, w, target)
    elif isinstance(oracle.strategy, BoundedConjugateSearch):
        answer = _bounded_search(p, w, target, oracle.strategy)
    elif isinstance(oracle.strategy, FiniteQuotientTests):
        answer = _finite_quotients(p, w, target, oracle.strategy)
    else:
        raise StrategyInapplicable(f"unknown strategy {oracle.strategy!r}")
    if isinstance(answer, Yes):
        assert product(p, answer.certificate) == free_reduce(w), "oracle produced a bad certificate"
    return answer


def auto_membership(
    p: Presentation,
    w: Word,
    target: Target,
    max_terms: int = 12,
    max_states: int = 20_000,
) -> MembershipAnswer:
    """FreeQuotient when applicable, else bounded conjugate search."""
    try:
        return membership(MembershipOracle(FreeQuotient()), p, w, target)
    except StrategyInapplicable:
        return membership(
            MembershipOracle(BoundedConjugateSearch(max_terms, max_states)), p, w, target
        )
