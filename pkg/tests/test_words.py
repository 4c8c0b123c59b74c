import pytest
from hypothesis import given, settings, strategies as st

from peiffer.errors import EmptyWord
from peiffer.words import (
    CyclicWord,
    cyclic_reduce,
    free_reduce,
    inverse,
    is_cyclic_permutation,
    least_rotation,
    multiply,
    conjugate,
    parse_word,
    root_and_period,
    word_str,
)

GENS = ("a", "b", "c")


def w(text):
    return parse_word(text, GENS)


def test_free_reduce_single_cancellation():
    assert free_reduce(w("aAb")) == w("b")


def test_free_reduce_empty():
    assert free_reduce(()) == ()


def test_free_reduce_nested():
    assert free_reduce(w("abBA")) == ()


def test_multiply_examples():
    assert multiply(w("ab"), w("Ba")) == w("aa")
    assert multiply(w("abc"), inverse(w("abc"))) == ()
    assert multiply((), w("bA")) == free_reduce(w("bA"))


def test_conjugate_examples():
    assert conjugate(w("a"), w("b")) == w("baB")
    assert conjugate(w("a"), ()) == w("a")
    assert conjugate(w("A"), w("a")) == w("A")


def test_cyclic_reduce():
    assert cyclic_reduce(w("baB")) == (w("a"), w("b"))
    assert cyclic_reduce(w("ab")) == (w("ab"), ())
    assert cyclic_reduce(w("baaB")) == (w("aa"), w("b"))


def test_root_and_period():
    root, p = root_and_period(CyclicWord.from_word(w("aaa")))
    assert root.letters == w("a") and p == 3
    root, p = root_and_period(CyclicWord.from_word(w("ab")))
    assert root.letters == w("ab") and p == 1
    # brute reference: abab decomposes at the shortest repeating block
    root, p = root_and_period(CyclicWord.from_word(w("abab")))
    assert root.letters == w("ab") and p == 2


def test_cyclic_word_rejects_empty_and_unreduced():
    with pytest.raises(EmptyWord):
        CyclicWord.from_word(())
    with pytest.raises(EmptyWord):
        CyclicWord.from_word(w("abA"))


def test_is_cyclic_permutation():
    assert is_cyclic_permutation(w("ab"), w("ba"))
    assert not is_cyclic_permutation(w("ab"), w("aB"))
    # all rotations of aba⁻¹ against a⁻¹ab (identical letters, rotated)
    assert is_cyclic_permutation(w("abA"), w("Aab"))
    assert is_cyclic_permutation(w("ab"), w("BA"), up_to_inversion=True)


def test_text_round_trip():
    assert word_str(w("abACb"), GENS) == "abACb"
    assert word_str((), GENS) == "1"
    assert parse_word("1", GENS) == ()


letters = st.sampled_from([1, -1, 2, -2, 3, -3])
words = st.lists(letters, max_size=20).map(tuple)


@settings(max_examples=300, deadline=None)
@given(words)
def test_free_reduce_idempotent(u):
    assert free_reduce(free_reduce(u)) == free_reduce(u)


@settings(max_examples=300, deadline=None)
@given(words, words, words)
def test_multiply_associative(u, v, x):
    assert multiply(multiply(u, v), x) == multiply(u, multiply(v, x))


@settings(max_examples=300, deadline=None)
@given(words, words, words)
def test_conjugate_composes(u, v, x):
    assert conjugate(x, multiply(u, v)) == conjugate(conjugate(x, v), u)


@settings(max_examples=300, deadline=None)
@given(words)
def test_least_rotation_is_a_rotation(u):
    r = least_rotation(u)
    assert len(r) == len(u)
    if u:
        assert any(u[i:] + u[:i] == r for i in range(len(u)))


@settings(max_examples=200, deadline=None)
@given(words)
def test_root_reassembles(u):
    core, _ = cyclic_reduce(u)
    if not core:
        return
    root, p = root_and_period(CyclicWord.from_word(core))
    assert root.letters * p == CyclicWord.from_word(core).letters
    assert len(core) % p == 0
