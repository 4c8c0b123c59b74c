"""Sequences of conjugated relators and the four elementary operations on them.

A sequence is a tuple of terms ``(W, r, ε)`` standing for the word
``W · r^ε · W⁻¹``.  The operations SUB (replace a conjugator by a freely
equal word), DEL (drop an identically canceling adjacent pair), INS (insert
such a pair) and EX (exchange two adjacent terms, conjugating one of them)
generate the equivalence under which products are invariant up to free
equality.  Sequences whose product is freely trivial are identity sequences.
"""

from __future__ import annotations

import logging
import warnings
from collections import deque
from dataclasses import dataclass, field

from .errors import NotIdentitySequence, PreconditionViolated
from .presentation import Presentation, shared_relators
from .words import (
    EMPTY,
    Word,
    free_reduce,
    inverse,
    multiply,
    word_root_and_period,
    word_str,
    parse_word,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConjTerm:
    """One term ``conjugator · relator^exponent · conjugator⁻¹``."""

    conjugator: Word
    relator: int
    exponent: int

    def __post_init__(self):
        if self.exponent not in (1, -1):
            raise ValueError("exponent must be +1 or -1")

    def inverse(self) -> "ConjTerm":
        return ConjTerm(self.conjugator, self.relator, -self.exponent)


Sequence = tuple[ConjTerm, ...]


def term_value(p: Presentation, t: ConjTerm) -> Word:
    """Unreduced word value ``W · r^ε · W⁻¹`` (letter-for-letter)."""
    r = p.relator_word(t.relator)
    core = r if t.exponent == 1 else inverse(r)
    return t.conjugator + core + inverse(t.conjugator)


def raw_product(p: Presentation, seq: Sequence) -> Word:
    """Concatenation of all term values, unreduced."""
    out: list[int] = []
    for t in seq:
        out.extend(term_value(p, t))
    return tuple(out)


def product(p: Presentation, seq: Sequence) -> Word:
    """Reduced product of the term values."""
    return free_reduce(raw_product(p, seq))


def boundary(p: Presentation, seq: Sequence) -> Word:
    """The crossed-module boundary: the reduced product, as a free-group element."""
    return product(p, seq)


def is_identity_sequence(p: Presentation, seq: Sequence) -> bool:
    return product(p, seq) == EMPTY


def trivial_sequence(p: Presentation, rid: int) -> Sequence:
    """The canceling pair ``(r, r° r⁻¹ r°⁻¹)`` built from the root r° of r."""
    root, _period = word_root_and_period(p.relator_word(rid))
    return (ConjTerm(EMPTY, rid, 1), ConjTerm(root, rid, -1))


def inverse_sequence(seq: Sequence) -> Sequence:
    return tuple(t.inverse() for t in reversed(seq))


def conjugate_sequence(seq: Sequence, by: Word) -> Sequence:
    """Left-extend every conjugator by ``by`` (word concatenation)."""
    return tuple(ConjTerm(by + t.conjugator, t.relator, t.exponent) for t in seq)


def normalize(seq: Sequence) -> Sequence:
    """SUB-normal form: every conjugator freely reduced."""
    return tuple(ConjTerm(free_reduce(t.conjugator), t.relator, t.exponent) for t in seq)


# ---------------------------------------------------------------------------
# elementary operations


@dataclass(frozen=True)
class Sub:
    pos: int
    new_conjugator: Word


@dataclass(frozen=True)
class Del:
    pos: int


@dataclass(frozen=True)
class Ins:
    pos: int
    term: ConjTerm


@dataclass(frozen=True)
class Ex:
    pos: int
    direction: str  # "left": (c,d) -> (d, d⁻¹cd);  "right": (c,d) -> (cdc⁻¹, c)


PeifferOp = Sub | Del | Ins | Ex


def apply_peiffer(p: Presentation, seq: Sequence, op: PeifferOp) -> Sequence:
    """Apply one elementary operation; the product is preserved up to free equality."""
    if isinstance(op, Sub):
        if not 0 <= op.pos < len(seq):
            raise PreconditionViolated(f"SUB position {op.pos} out of range")
        t = seq[op.pos]
        if free_reduce(op.new_conjugator) != free_reduce(t.conjugator):
            raise PreconditionViolated("SUB conjugator is not freely equal to the old one")
        return seq[: op.pos] + (ConjTerm(op.new_conjugator, t.relator, t.exponent),) + seq[op.pos + 1 :]
    if isinstance(op, Del):
        if not 0 <= op.pos < len(seq) - 1:
            raise PreconditionViolated(f"DEL position {op.pos} out of range")
        a, b = seq[op.pos], seq[op.pos + 1]
        if a.relator != b.relator or a.exponent != -b.exponent or a.conjugator != b.conjugator:
            raise PreconditionViolated(
                "DEL needs an identically canceling pair (same relator, opposite exponent, "
                "identical conjugators)"
            )
        return seq[: op.pos] + seq[op.pos + 2 :]
    if isinstance(op, Ins):
        if not 0 <= op.pos <= len(seq):
            raise PreconditionViolated(f"INS position {op.pos} out of range")
        return seq[: op.pos] + (op.term, op.term.inverse()) + seq[op.pos :]
    if isinstance(op, Ex):
        if not 0 <= op.pos < len(seq) - 1:
            raise PreconditionViolated(f"EX position {op.pos} out of range")
        c, d = seq[op.pos], seq[op.pos + 1]
        if op.direction == "left":
            # (c, d) -> (d, d⁻¹ c d): the moved term keeps c's relator and sign
            new = ConjTerm(
                free_reduce(inverse(term_value(p, d)) + c.conjugator), c.relator, c.exponent
            )
            pair = (d, new)
        elif op.direction == "right":
            # (c, d) -> (c d c⁻¹, c)
            new = ConjTerm(
                free_reduce(term_value(p, c) + d.conjugator), d.relator, d.exponent
            )
            pair = (new, c)
        else:
            raise PreconditionViolated(f"EX direction must be left or right, got {op.direction!r}")
        return seq[: op.pos] + pair + seq[op.pos + 2 :]
    raise PreconditionViolated(f"unknown operation {op!r}")


def sub_script(seq: Sequence) -> list[Sub]:
    """SUB operations that bring every conjugator to reduced form."""
    return [
        Sub(i, free_reduce(t.conjugator))
        for i, t in enumerate(seq)
        if free_reduce(t.conjugator) != t.conjugator
    ]


# ---------------------------------------------------------------------------
# greedy reduction and bounded equivalence


def _cancelable(p: Presentation, seq: Sequence, j: int, k: int) -> bool:
    """Can term k be EX-moved next to term j and then deleted against it?"""
    a, b = seq[j], seq[k]
    if a.relator != b.relator or a.exponent != -b.exponent:
        return False
    between: list[int] = []
    for t in seq[j + 1 : k]:
        between.extend(term_value(p, t))
    moved = free_reduce(tuple(between) + b.conjugator)
    return free_reduce(a.conjugator) == moved


def _cancelable_after_eviction(p: Presentation, seq: Sequence, j: int, k: int) -> bool:
    """Can the terms between j and k be EX-evicted so the pair deletes directly?"""
    a, b = seq[j], seq[k]
    if a.relator != b.relator or a.exponent != -b.exponent:
        return False
    return free_reduce(a.conjugator) == free_reduce(b.conjugator)


def peiffer_reduce(p: Presentation, seq: Sequence, window: int = 16) -> Sequence:
    """Greedy normal-form heuristic: SUB-normalize, then delete cancelable pairs.

    Pairs separated by up to ``window`` terms are brought together by EX
    moves.  The result is equivalent to the input and no further greedy step
    applies; it is a heuristic, not a canonical form.
    """
    cur = normalize(seq)
    changed = True
    while changed:
        changed = False
        n = len(cur)
        # nearest pairs first: adjacent deletions never block an inside-out collapse
        for dist in range(1, min(n, window + 1)):
            for j in range(n - dist):
                k = j + dist
                if _cancelable(p, cur, j, k):
                    # walk term k leftward; each EX-right conjugates it by the
                    # term it passes, landing next to j with matching conjugator
                    work = cur
                    for pos in range(k - 1, j, -1):
                        work = apply_peiffer(p, work, Ex(pos, "right"))
                    work = normalize(work)
                    cur = apply_peiffer(p, work, Del(j))
                    changed = True
                    break
                if _cancelable_after_eviction(p, cur, j, k):
                    # push every obstructor rightward past term k (EX-left
                    # leaves the passed term untouched), then delete the pair
                    work = cur
                    top = k
                    while top > j + 1:
                        for pos in range(j + 1, top):
                            work = apply_peiffer(p, work, Ex(pos, "left"))
                        top -= 1
                    work = normalize(work)
                    cur = apply_peiffer(p, work, Del(j))
                    changed = True
                    break
            if changed:
                break
        # the inner loops restart the scan after every deletion
    return cur


@dataclass(frozen=True)
class Equivalent:
    script: tuple[PeifferOp, ...]


@dataclass(frozen=True)
class NotEquivalent:
    reason: str


@dataclass(frozen=True)
class Unknown:
    reason: str = "budget exhausted"


def _neighbors(p: Presentation, seq: Sequence):
    """Canonical-state neighbors under DEL and EX (states stay SUB-normalized)."""
    for pos in range(len(seq) - 1):
        a, b = seq[pos], seq[pos + 1]
        if a.relator == b.relator and a.exponent == -b.exponent and a.conjugator == b.conjugator:
            yield Del(pos), seq[:pos] + seq[pos + 2 :]
        yield Ex(pos, "left"), normalize(apply_peiffer(p, seq, Ex(pos, "left")))
        yield Ex(pos, "right"), normalize(apply_peiffer(p, seq, Ex(pos, "right")))


def _invert_op(op: PeifferOp, state_before: Sequence) -> PeifferOp:
    """The operation undoing ``op`` (on SUB-normalized states)."""
    if isinstance(op, Del):
        return Ins(op.pos, state_before[op.pos])
    if isinstance(op, Ex):
        return Ex(op.pos, "right" if op.direction == "left" else "left")
    raise AssertionError(op)


def peiffer_equivalent_bounded(
    p: Presentation,
    seq1: Sequence,
    seq2: Sequence,
    max_depth: int = 8,
    max_states: int = 100_000,
) -> Equivalent | NotEquivalent | Unknown:
    """Bidirectional search for an operation script from seq1 to seq2.

    The product is an invariant of the equivalence, so differing products
    short-circuit to :class:`NotEquivalent`.  A returned script replays with
    :func:`apply_peiffer` (it begins with SUB normalization of seq1).
    """
    if product(p, seq1) != product(p, seq2):
        return NotEquivalent("products are not freely equal")
    start, goal = normalize(seq1), normalize(seq2)
    prefix: list[PeifferOp] = sub_script(seq1)
    if start == goal:
        return Equivalent(tuple(prefix))

    # parents: state -> (previous state, op applied on the forward side)
    fwd: dict[Sequence, tuple[Sequence, PeifferOp] | None] = {start: None}
    bwd: dict[Sequence, tuple[Sequence, PeifferOp] | None] = {goal: None}
    f_frontier, b_frontier = deque([start]), deque([goal])
    expanded = 0
    meet: Sequence | None = None
    for _depth in range(max_depth):
        for frontier, seen, other in ((f_frontier, fwd, bwd), (b_frontier, bwd, fwd)):
            nxt: deque[Sequence] = deque()
            while frontier:
                state = frontier.popleft()
                for op, to in _neighbors(p, state):
                    expanded += 1
                    if expanded > max_states:
                        return Unknown("state budget exhausted")
                    if to in seen:
                        continue
                    seen[to] = (state, op)
                    if to in other:
                        meet = to
                        break
                    nxt.append(to)
                if meet is not None:
                    break
            frontier.extend(nxt)
            if meet is not None:
                break
        if meet is not None:
            break
    if meet is None:
        return Unknown("depth budget exhausted")

    ops: list[PeifferOp] = []
    node = meet
    while fwd[node] is not None:
        prev, op = fwd[node]  # type: ignore[misc]
        ops.append(op)
        node = prev
    ops.reverse()
    node = meet
    while bwd[node] is not None:
        prev, op = bwd[node]  # type: ignore[misc]
        # op moved prev -> node on the backward side; emit its inverse
        ops.append(_invert_op(op, prev))
        node = prev
    return Equivalent(tuple(prefix + ops))


def replay(p: Presentation, seq: Sequence, script: tuple[PeifferOp, ...]) -> Sequence:
    cur = seq
    for op in script:
        cur = apply_peiffer(p, cur, op)
    return cur


# ---------------------------------------------------------------------------
# the family-subproduct homomorphism and its constructive certificates


def _is_family_term(p: Presentation, t: ConjTerm, i: int) -> bool:
    return t.relator in p.family(i)


def eta_image(p: Presentation, seq: Sequence, i: int) -> Word:
    """Reduced ordered product of the word values of the family-``i`` terms.

    Defined on identity sequences; a term counts for family ``i`` exactly when
    its relator belongs to that family, shared relators included.
    """
    if not is_identity_sequence(p, seq):
        raise NotIdentitySequence("eta is defined on identity sequences only")
    if shared_relators(p, i) and any(t.relator in shared_relators(p, i) for t in seq):
        warnings.warn(
            "sequence uses relators shared between families; family membership of the "
            "relator decides its classification",
            RuntimeWarning,
            stacklevel=2,
        )
    out: list[int] = []
    for t in seq:
        if _is_family_term(p, t, i):
            out.extend(term_value(p, t))
    return free_reduce(tuple(out))


@dataclass(frozen=True)
class FreeEquality:
    """The two subproducts are freely equal with no correction factor."""


@dataclass(frozen=True)
class Commutator:
    """Correction ``B⁻¹ · [c⁻¹, d⁻¹] · B`` with c, d the word values of left/right."""

    conjugator: Word  # B
    left: ConjTerm    # the family-i term
    right: ConjTerm   # the other term (not in family i)

    def expansion(self, p: Presentation) -> Word:
        c = free_reduce(term_value(p, self.left))
        d = free_reduce(term_value(p, self.right))
        com = free_reduce(inverse(c) + inverse(d) + c + d)
        return free_reduce(inverse(self.conjugator) + com + self.conjugator)


EtaFactor = FreeEquality | Commutator


@dataclass(frozen=True)
class EtaCertificate:
    """Relates the family subproducts before and after one operation.

    ``new_V`` is freely equal to ``old_V`` times the expanded factors in
    order; verification is an exact free-group computation.
    """

    old_V: Word
    new_V: Word
    factors: tuple[EtaFactor, ...]

    def verify(self, p: Presentation) -> bool:
        acc = self.old_V
        for f in self.factors:
            if isinstance(f, Commutator):
                acc = multiply(acc, f.expansion(p))
        return acc == free_reduce(self.new_V)


def eta_certificate(p: Presentation, seq: Sequence, op: PeifferOp, i: int) -> EtaCertificate:
    """Constructive well-definedness witness for one operation on an identity sequence."""
    if not is_identity_sequence(p, seq):
        raise NotIdentitySequence("eta certificates require an identity sequence")
    old_v = eta_image(p, seq, i)
    new_seq = apply_peiffer(p, seq, op)
    new_v = eta_image(p, new_seq, i)
    factors: tuple[EtaFactor, ...] = (FreeEquality(),)
    if isinstance(op, Ex):
        c, d = seq[op.pos], seq[op.pos + 1]
        c_in, d_in = _is_family_term(p, c, i), _is_family_term(p, d, i)
        # only the conjugated term can change the subproduct: the left term
        # under EX-left, the right term under EX-right
        if op.direction == "left" and c_in and not d_in:
            b = _suffix_subproduct(p, seq, op.pos + 1, i)
            factors = (Commutator(b, c, d),)
        elif op.direction == "right" and d_in and not c_in:
            b = _suffix_subproduct(p, seq, op.pos + 1, i)
            factors = (Commutator(b, d, c.inverse()),)
    cert = EtaCertificate(old_v, new_v, factors)
    if not cert.verify(p):
        raise AssertionError("internal error: eta certificate failed its own verification")
    return cert


def _suffix_subproduct(p: Presentation, seq: Sequence, after: int, i: int) -> Word:
    """Reduced product of family-``i`` term values strictly after position ``after``."""
    out: list[int] = []
    for t in seq[after + 1 :]:
        if _is_family_term(p, t, i):
            out.extend(term_value(p, t))
    return free_reduce(tuple(out))


# ---------------------------------------------------------------------------
# text format: one term per line, "<W> <relator-index> <+|->" with 1-based ids


def parse_sequence(text: str, p: Presentation) -> Sequence:
    terms: list[ConjTerm] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise PreconditionViolated(
                f"line {lineno}: expected '<conjugator> <relator#> <+|->', got {line!r}"
            )
        w = parse_word(parts[0], p.generators)
        rid = int(parts[1]) - 1
        if not 0 <= rid < len(p.relators):
            raise PreconditionViolated(f"line {lineno}: relator #{parts[1]} out of range")
        if parts[2] not in ("+", "-"):
            raise PreconditionViolated(f"line {lineno}: sign must be + or -")
        terms.append(ConjTerm(w, rid, 1 if parts[2] == "+" else -1))
    return tuple(terms)


def sequence_text(seq: Sequence, p: Presentation) -> str:
    lines = [
        f"{word_str(t.conjugator, p.generators)} {t.relator + 1} {'+' if t.exponent == 1 else '-'}"
        for t in seq
    ]
    return "\n".join(lines) + ("\n" if lines else "")
