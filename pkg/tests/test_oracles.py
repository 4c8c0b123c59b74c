import pytest

from peiffer.errors import StrategyInapplicable
from peiffer.oracles import (
    BoundedConjugateSearch,
    FiniteQuotientTests,
    FreeQuotient,
    MembershipOracle,
    NClosure,
    No,
    RClosure,
    Unknown,
    Yes,
    auto_membership,
    membership,
)
from peiffer.presentation import parse_presentation
from peiffer.sequences import product
from peiffer.words import EMPTY, free_reduce, parse_word

AB = parse_presentation("gens: a b\nrel 1: a\nrel 2: b\n")
A3S = parse_presentation("gens: a\nrel 1: aaa\nrel 2: aaa\n")


def w(p, text):
    return parse_word(text, p.generators)


def test_free_quotient_commutator_membership():
    u = w(AB, "abaBAbAB")
    ans = membership(MembershipOracle(FreeQuotient()), AB, u, RClosure(1))
    assert isinstance(ans, Yes)
    assert product(AB, ans.certificate) == u
    assert len(ans.certificate) == 4


def test_free_quotient_no_witness():
    ans = membership(MembershipOracle(FreeQuotient()), AB, w(AB, "a"), NClosure(1))
    assert isinstance(ans, No)


def test_free_quotient_empty_word():
    ans = membership(MembershipOracle(FreeQuotient()), AB, EMPTY, RClosure(1))
    assert isinstance(ans, Yes) and ans.certificate == ()


def test_free_quotient_inapplicable():
    with pytest.raises(StrategyInapplicable):
        membership(MembershipOracle(FreeQuotient()), A3S, w(A3S, "aaa"), RClosure(1))


def test_bounded_search_conjugate_of_relator():
    target = w(A3S, "aaa")
    ans = membership(MembershipOracle(BoundedConjugateSearch()), A3S, target, RClosure(1))
    assert isinstance(ans, Yes)
    assert product(A3S, ans.certificate) == target


def test_bounded_search_conjugated():
    p = parse_presentation("gens: a b\nrel 1: aaa\nrel 2: b\n")
    u = free_reduce(w(p, "b") + w(p, "aaa") + w(p, "B"))
    ans = membership(MembershipOracle(BoundedConjugateSearch()), p, u, RClosure(1))
    assert isinstance(ans, Yes)
    assert product(p, ans.certificate) == u


def test_bounded_search_abelianized_no():
    p = parse_presentation("gens: a b\nrel 1: aaa\nrel 2: b\n")
    ans = membership(MembershipOracle(BoundedConjugateSearch()), p, w(p, "a"), RClosure(1))
    assert isinstance(ans, No)


def test_bounded_search_unknown():
    # baB is not in ncl(aaa) but has a zero exponent-sum shadow only if... it
    # does not: exponent of a is 1, so the lattice test already answers; use a
    # word with exponent sum divisible by 3 that still is not a member
    p = parse_presentation("gens: a b\nrel 1: aaa\nrel 2: b\n")
    u = w(p, "abaBAbAB")  # exponent sums are zero
    ans = membership(
        MembershipOracle(BoundedConjugateSearch(max_terms=3, max_states=200)), p, u, RClosure(1)
    )
    assert isinstance(ans, (Unknown, No))


def test_finite_quotient_no():
    # kill b, send a to a 2-cycle: separates a from ncl(b)
    table = {"a": (1, 0), "b": (0, 1)}
    ans = membership(
        MembershipOracle(FiniteQuotientTests((table,))), AB, w(AB, "a"), NClosure(1)
    )
    assert isinstance(ans, No)


def test_finite_quotient_unknown_when_useless():
    table = {"a": (1, 0), "b": (1, 0)}  # does not kill b
    ans = membership(
        MembershipOracle(FiniteQuotientTests((table,))), AB, w(AB, "a"), NClosure(1)
    )
    assert isinstance(ans, Unknown)


def test_auto_membership_prefers_free_quotient():
    ans = auto_membership(AB, w(AB, "abaBAbAB"), NClosure(1))
    assert isinstance(ans, Yes)


def test_auto_membership_falls_back_to_search():
    ans = auto_membership(A3S, w(A3S, "aaa"), RClosure(1))
    assert isinstance(ans, Yes)
