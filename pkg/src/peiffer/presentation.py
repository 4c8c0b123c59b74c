"""Presentations with the relator set partitioned into (possibly overlapping) families.

A presentation file is line oriented::

    gens: a b
    rel 1: aaa
    rel 2: bb

``rel k:`` assigns the relator on that line to family ``k`` (families are
numbered 1..n).  Repeating the same word under two families makes it a shared
relator: one table entry belonging to both families.  Every relator must
arrive cyclically reduced; a line whose word reduces differently is rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import PresentationSyntaxError, ValidationError
from .words import (
    Word,
    free_reduce,
    inverse,
    is_cyclically_reduced,
    least_rotation,
    parse_word,
    word_str,
)


@dataclass(frozen=True)
class Presentation:
    """Generators plus a relator table and n ≥ 1 families of relator ids."""

    generators: tuple[str, ...]
    relators: tuple[Word, ...]
    families: tuple[frozenset[int], ...]
    source: str | None = field(default=None, compare=False)

    @property
    def n_families(self) -> int:
        return len(self.families)

    def relator_word(self, rid: int) -> Word:
        return self.relators[rid]

    def families_of(self, rid: int) -> frozenset[int]:
        """1-based family indices containing the relator."""
        return frozenset(i + 1 for i, fam in enumerate(self.families) if rid in fam)

    def family(self, i: int) -> frozenset[int]:
        """Relator ids of family ``i`` (1-based)."""
        if not 1 <= i <= len(self.families):
            raise ValueError(f"family index {i} out of range 1..{len(self.families)}")
        return self.families[i - 1]

    def complement_family(self, i: int) -> frozenset[int]:
        """Relator ids belonging to ``⋃_{j≠i}`` family j."""
        out: set[int] = set()
        for j, fam in enumerate(self.families):
            if j != i - 1:
                out |= fam
        return frozenset(out)

    def word(self, text: str) -> Word:
        return parse_word(text, self.generators)

    def text(self, w: Word) -> str:
        return word_str(w, self.generators)

    def __hash__(self):
        return hash((self.generators, self.relators, self.families))


def shared_relators(p: Presentation, i: int) -> frozenset[int]:
    """Relators of family ``i`` that also belong to some other family."""
    return p.family(i) & p.complement_family(i)


def families_disjoint(p: Presentation) -> bool:
    """True iff the families are mutually disjoint relator sets."""
    seen: set[int] = set()
    for fam in p.families:
        if seen & fam:
            return False
        seen |= fam
    return True


def validate_rh(p: Presentation) -> list[str]:
    """Check the relator-hygiene hypothesis; returns violations (empty = ok).

    Conditions: no relator is freely trivial, and no relator is a conjugate of
    another relator or of another relator's inverse.  For cyclically reduced
    words conjugacy is cyclic permutation, so the check compares canonical
    least rotations.
    """
    violations: list[str] = []
    canon: dict[Word, int] = {}
    for rid, w in enumerate(p.relators):
        if not free_reduce(w):
            violations.append(f"relator #{rid + 1} ({p.text(w)!r}) is freely trivial")
            continue
        if not is_cyclically_reduced(w):
            violations.append(f"relator #{rid + 1} ({p.text(w)!r}) is not cyclically reduced")
            continue
        key = least_rotation(w)
        ikey = least_rotation(inverse(w))
        if key in canon:
            violations.append(
                f"relator #{rid + 1} ({p.text(w)!r}) is a conjugate of relator #{canon[key] + 1}"
            )
        elif ikey in canon:
            violations.append(
                f"relator #{rid + 1} ({p.text(w)!r}) is a conjugate of the inverse of "
                f"relator #{canon[ikey] + 1}"
            )
        else:
            canon[key] = rid
    for rid in range(len(p.relators)):
        if not p.families_of(rid):
            violations.append(f"relator #{rid + 1} belongs to no family")
    return violations


def make_presentation(
    generators: tuple[str, ...] | list[str],
    family_words: list[list[Word]],
    source: str | None = None,
) -> Presentation:
    """Build and validate a presentation from per-family relator word lists.

    Identical words appearing in several families become one shared relator.
    """
    gens = tuple(generators)
    table: list[Word] = []
    index: dict[Word, int] = {}
    families: list[set[int]] = [set() for _ in family_words]
    for fam_no, ws in enumerate(family_words):
        for w in ws:
            if w not in index:
                index[w] = len(table)
                table.append(w)
            families[fam_no].add(index[w])
    p = Presentation(gens, tuple(table), tuple(frozenset(f) for f in families), source)
    violations = validate_rh(p)
    if violations:
        raise ValidationError(violations)
    return p


def parse_presentation(text: str, source: str | None = None) -> Presentation:
    """Parse the line-oriented grammar; raises on syntax or hygiene failures."""
    generators: tuple[str, ...] | None = None
    family_words: dict[int, list[Word]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("gens:"):
            if generators is not None:
                raise PresentationSyntaxError("duplicate gens: line", line=lineno)
            names = line[len("gens:"):].split()
            if not names:
                raise PresentationSyntaxError("no generators given", line=lineno)
            for name in names:
                if len(name) != 1 or not name.isalpha() or not name.islower():
                    raise PresentationSyntaxError(
                        f"generator names must be single lowercase letters, got {name!r}",
                        line=lineno,
                    )
            if len(set(names)) != len(names):
                raise PresentationSyntaxError("duplicate generator name", line=lineno)
            generators = tuple(names)
            continue
        if line.startswith("rel"):
            head, _, body = line.partition(":")
            if not _:
                raise PresentationSyntaxError("missing ':' in rel line", line=lineno)
            try:
                fam_no = int(head[len("rel"):].strip())
            except ValueError:
                raise PresentationSyntaxError(f"bad family number in {head!r}", line=lineno)
            if fam_no < 1:
                raise PresentationSyntaxError("family numbers start at 1", line=lineno)
            if generators is None:
                raise PresentationSyntaxError("rel line before gens: line", line=lineno)
            word_text = body.strip()
            try:
                w = parse_word(word_text, generators)
            except PresentationSyntaxError as exc:
                raise PresentationSyntaxError(str(exc), line=lineno) from None
            if not w:
                raise PresentationSyntaxError("relator is the empty word", line=lineno)
            if not is_cyclically_reduced(w):
                raise PresentationSyntaxError(
                    f"relator {word_text!r} is not cyclically reduced", line=lineno
                )
            family_words.setdefault(fam_no, []).append(w)
            continue
        raise PresentationSyntaxError(f"unrecognized line {line!r}", line=lineno)
    if generators is None:
        raise PresentationSyntaxError("missing gens: line", line=1)
    if not family_words:
        raise PresentationSyntaxError("no relators given", line=1)
    n = max(family_words)
    if set(family_words) != set(range(1, n + 1)):
        raise PresentationSyntaxError(
            f"family numbers must be contiguous 1..{n}", line=1
        )
    return make_presentation(
        generators, [family_words[k] for k in range(1, n + 1)], source
    )


def load_presentation(path: str) -> Presentation:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_presentation(fh.read(), source=path)


def presentation_text(p: Presentation) -> str:
    """Render back to the file grammar (deterministic)."""
    lines = ["gens: " + " ".join(p.generators)]
    for fam_no, fam in enumerate(p.families, start=1):
        for rid in sorted(fam):
            lines.append(f"rel {fam_no}: {p.text(p.relators[rid])}")
    return "\n".join(lines) + "\n"
