"""Free-group word algebra over a finite generator alphabet.

A word is a tuple of nonzero ints: letter ``+(g+1)`` is generator ``g``,
``-(g+1)`` its inverse.  Unreduced words are first-class values; identical
equality is tuple equality and free equality is equality after
:func:`free_reduce`.  Text notation uses one lowercase letter per generator,
the matching uppercase letter for its inverse, and ``"1"`` (or the empty
string) for the empty word, e.g. ``"abA"`` is a·b·a⁻¹.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from .errors import EmptyWord, PresentationSyntaxError

Word = tuple[int, ...]

EMPTY: Word = ()


def free_reduce(w: Word) -> Word:
    """Cancel adjacent inverse pairs until none remain (single stack pass)."""
    out: list[int] = []
    for letter in w:
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def inverse(w: Word) -> Word:
    """Formal inverse: reversed letters, each inverted."""
    return tuple(-letter for letter in reversed(w))


def multiply(u: Word, v: Word) -> Word:
    """Reduced product of two words."""
    return free_reduce(u + v)


def conjugate(w: Word, by: Word) -> Word:
    """Reduced ``by · w · by⁻¹``."""
    return free_reduce(by + w + inverse(by))


def commutator(u: Word, v: Word) -> Word:
    """Reduced ``u v u⁻¹ v⁻¹``."""
    return free_reduce(u + v + inverse(u) + inverse(v))


def is_reduced(w: Word) -> bool:
    return all(w[i] != -w[i + 1] for i in range(len(w) - 1))


def cyclic_reduce(w: Word) -> tuple[Word, Word]:
    """Split ``w`` as ``conjugator · core · conjugator⁻¹`` with cyclically reduced core.

    ``free_reduce(conjugator + core + inverse(conjugator))`` equals
    ``free_reduce(w)``.
    """
    core = free_reduce(w)
    prefix: list[int] = []
    while len(core) >= 2 and core[0] == -core[-1]:
        prefix.append(core[0])
        core = core[1:-1]
    return core, tuple(prefix)


def is_cyclically_reduced(w: Word) -> bool:
    if not is_reduced(w):
        return False
    return len(w) < 2 or w[0] != -w[-1]


def _letter_key(letter: int) -> tuple[int, int]:
    # generator index ascending; positive exponent sorts before negative
    return (abs(letter), 0 if letter > 0 else 1)


def least_rotation(w: Word) -> Word:
    """Lexicographically least rotation under the (generator, sign) order."""
    if not w:
        return w
    keys = [_letter_key(letter) for letter in w]
    best = min(range(len(w)), key=lambda i: [keys[(i + j) % len(w)] for j in range(len(w))])
    return w[best:] + w[:best]


def rotations(w: Word):
    for i in range(len(w)):
        yield w[i:] + w[:i]


def is_cyclic_permutation(u: Word, v: Word, up_to_inversion: bool = False) -> bool:
    """True iff some rotation of ``u`` is identically ``v`` (optionally ``v⁻¹``)."""
    if len(u) != len(v):
        return False
    if not u:
        return True
    if least_rotation(u) == least_rotation(v):
        return True
    return up_to_inversion and least_rotation(u) == least_rotation(inverse(v))


@dataclass(frozen=True)
class CyclicWord:
    """A nonempty word taken up to rotation, stored as its least rotation.

    The stored form is freely and cyclically reduced; construction rejects
    input the reduction of which would differ from the input.
    """

    letters: Word

    @staticmethod
    def from_word(w: Word) -> "CyclicWord":
        if not w:
            raise EmptyWord("cyclic words must be nonempty")
        if not is_cyclically_reduced(w):
            raise EmptyWord(f"word is not cyclically reduced: {w!r}")
        return CyclicWord(least_rotation(w))

    def __len__(self) -> int:
        return len(self.letters)

    def inverse(self) -> "CyclicWord":
        return CyclicWord.from_word(inverse(self.letters))


def root_and_period(r: CyclicWord) -> tuple[CyclicWord, int]:
    """Maximal decomposition ``r = root^period`` with the root not a proper power."""
    w = r.letters
    n = len(w)
    if n == 0:
        raise EmptyWord("empty cyclic word has no root")
    for d in range(1, n + 1):
        if n % d:
            continue
        if w[:d] * (n // d) == w:
            return CyclicWord.from_word(w[:d]), n // d
    raise AssertionError("unreachable: every word is its own first power")


def word_root_and_period(w: Word) -> tuple[Word, int]:
    """Root and period of a cyclically reduced word, in its own rotation."""
    n = len(w)
    if n == 0:
        raise EmptyWord("empty word has no root")
    for d in range(1, n + 1):
        if n % d == 0 and w[:d] * (n // d) == w:
            return w[:d], n // d
    raise AssertionError("unreachable")


def power_exponent(w: Word, q: Word) -> int | None:
    """Return f with ``w == q^f`` identically (w, q reduced; q nonempty), else None."""
    if not q:
        return None
    if not w:
        return 0
    n, d = len(w), len(q)
    if n % d:
        return None
    f = n // d
    if q * f == w:
        return f
    if inverse(q) * f == w:
        return -f
    return None


def coprime(f: int, p: int) -> bool:
    return gcd(f, p) == 1


def parse_word(text: str, generators: tuple[str, ...]) -> Word:
    """Parse the letter notation (lowercase = generator, uppercase = inverse)."""
    text = text.strip()
    if text in ("", "1"):
        return EMPTY
    index = {name: g for g, name in enumerate(generators)}
    letters: list[int] = []
    for col, ch in enumerate(text):
        low = ch.lower()
        if low not in index:
            raise PresentationSyntaxError(f"unknown generator letter {ch!r}", column=col + 1)
        val = index[low] + 1
        letters.append(val if ch.islower() else -val)
    return tuple(letters)


def word_str(w: Word, generators: tuple[str, ...]) -> str:
    """Inverse of :func:`parse_word`; the empty word prints as ``"1"``."""
    if not w:
        return "1"
    parts = []
    for letter in w:
        name = generators[abs(letter) - 1]
        parts.append(name if letter > 0 else name.upper())
    return "".join(parts)
