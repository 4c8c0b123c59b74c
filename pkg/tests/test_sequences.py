import random

import pytest

from peiffer.errors import NotIdentitySequence, PreconditionViolated
from peiffer.presentation import parse_presentation
from peiffer.sequences import (
    Commutator,
    ConjTerm,
    Del,
    Equivalent,
    Ex,
    FreeEquality,
    Ins,
    NotEquivalent,
    Sub,
    apply_peiffer,
    boundary,
    conjugate_sequence,
    eta_certificate,
    eta_image,
    inverse_sequence,
    is_identity_sequence,
    normalize,
    parse_sequence,
    peiffer_equivalent_bounded,
    peiffer_reduce,
    product,
    raw_product,
    replay,
    sequence_text,
    term_value,
    trivial_sequence,
)
from peiffer.words import EMPTY, free_reduce, inverse, parse_word

AB = parse_presentation("gens: a b\nrel 1: a\nrel 2: b\n")
A3 = parse_presentation("gens: a\nrel 1: aaa\n")
AB_SHARED = parse_presentation("gens: a b\nrel 1: a\nrel 1: b\nrel 2: b\n")


def w(p, text):
    return parse_word(text, p.generators)


def t(p, conj, rid, sign):
    return ConjTerm(w(p, conj), rid, sign)


def test_product_examples():
    assert product(AB, (t(AB, "b", 0, 1),)) == w(AB, "baB")
    assert product(AB, ()) == EMPTY
    assert product(AB, (t(AB, "1", 0, 1), t(AB, "1", 0, -1))) == EMPTY


def test_trivial_sequence_a3():
    zeta = trivial_sequence(A3, 0)
    assert zeta == (ConjTerm((), 0, 1), ConjTerm((1,), 0, -1))
    # raw value: aaa · a a⁻¹a⁻¹a⁻¹ a⁻¹ reduces to nothing
    assert is_identity_sequence(A3, zeta)


def test_trivial_sequence_period_one():
    p = parse_presentation("gens: a b\nrel 1: ab\n")
    zeta = trivial_sequence(p, 0)
    assert zeta[1].conjugator == w(p, "ab")
    assert is_identity_sequence(p, zeta)


def test_trivial_sequence_proper_power_root():
    p = parse_presentation("gens: a b\nrel 1: abab\n")
    zeta = trivial_sequence(p, 0)
    assert zeta[1].conjugator == w(p, "ab")
    assert is_identity_sequence(p, zeta)


def test_is_identity_sequence_examples():
    assert not is_identity_sequence(AB, (t(AB, "1", 0, 1),))
    sigma = (t(AB, "b", 0, 1), t(AB, "1", 1, -1))
    assert is_identity_sequence(AB, sigma + inverse_sequence(sigma))


def test_inverse_and_conjugate():
    sigma = (t(AB, "1", 0, 1), t(AB, "b", 0, -1))
    assert inverse_sequence(sigma) == (t(AB, "b", 0, 1), t(AB, "1", 0, -1))
    assert conjugate_sequence((t(AB, "1", 0, 1),), w(AB, "b")) == (t(AB, "b", 0, 1),)
    assert conjugate_sequence(sigma, EMPTY) == sigma
    assert product(AB, conjugate_sequence(sigma, w(AB, "ab"))) == free_reduce(
        w(AB, "ab") + product(AB, sigma) + inverse(w(AB, "ab"))
    )


def test_ex_left_example():
    sigma = (t(AB, "1", 0, 1), t(AB, "1", 1, 1))
    out = apply_peiffer(AB, sigma, Ex(0, "left"))
    assert out == (t(AB, "1", 1, 1), t(AB, "B", 0, 1))
    assert product(AB, out) == product(AB, sigma) == w(AB, "ab")


def test_del_and_ins():
    sigma = (t(AB, "1", 0, 1), t(AB, "1", 0, -1))
    assert apply_peiffer(AB, sigma, Del(0)) == ()
    back = apply_peiffer(AB, (), Ins(0, t(AB, "1", 0, 1)))
    assert back == sigma


def test_sub_checks_free_equality():
    sigma = (t(AB, "aAb", 0, 1),)
    out = apply_peiffer(AB, sigma, Sub(0, w(AB, "b")))
    assert out == (t(AB, "b", 0, 1),)
    with pytest.raises(PreconditionViolated):
        apply_peiffer(AB, sigma, Sub(0, w(AB, "a")))


def test_del_requires_identical_conjugators():
    sigma = (t(AB, "aAb", 0, 1), t(AB, "b", 0, -1))
    with pytest.raises(PreconditionViolated):
        apply_peiffer(AB, sigma, Del(0))
    fixed = apply_peiffer(AB, sigma, Sub(0, w(AB, "b")))
    assert apply_peiffer(AB, fixed, Del(0)) == ()


def _random_sequence(p, rng, max_terms=6, max_conj=4):
    terms = []
    for _ in range(rng.randrange(max_terms + 1)):
        conj = tuple(
            rng.choice([g, -g])
            for g in rng.choices(range(1, len(p.generators) + 1), k=rng.randrange(max_conj + 1))
        )
        terms.append(ConjTerm(conj, rng.randrange(len(p.relators)), rng.choice([1, -1])))
    return tuple(terms)


def _random_op(p, seq, rng):
    choices = ["ins"]
    if seq:
        choices.append("sub")
    if len(seq) >= 2:
        choices += ["ex", "ex", "del_try"]
    kind = rng.choice(choices)
    if kind == "ins":
        pos = rng.randrange(len(seq) + 1)
        return Ins(pos, _random_sequence(p, rng, max_terms=1, max_conj=3)[0] if False else ConjTerm(
            tuple(rng.choice([1, -1]) * rng.randrange(1, len(p.generators) + 1) for _ in range(rng.randrange(3))),
            rng.randrange(len(p.relators)),
            rng.choice([1, -1]),
        ))
    if kind == "sub":
        pos = rng.randrange(len(seq))
        pad = rng.randrange(1, len(p.generators) + 1)
        new = seq[pos].conjugator + (pad, -pad)
        return Sub(pos, new)
    if kind == "ex":
        return Ex(rng.randrange(len(seq) - 1), rng.choice(["left", "right"]))
    # del_try: synthesize a deletable pair first
    pos = rng.randrange(len(seq) - 1)
    return Ex(pos, "left")


def test_product_invariant_randomized():
    rng = random.Random(7)
    for _ in range(500):
        p = rng.choice([AB, A3, AB_SHARED])
        seq = _random_sequence(p, rng)
        op = _random_op(p, seq, rng)
        out = apply_peiffer(p, seq, op)
        assert product(p, out) == product(p, seq)


def test_peiffer_reduce_collapses_palindrome():
    rng = random.Random(3)
    for _ in range(50):
        p = rng.choice([AB, A3])
        sigma = _random_sequence(p, rng, max_terms=4)
        assert peiffer_reduce(p, sigma + inverse_sequence(sigma)) == ()


def test_peiffer_reduce_keeps_irreducible():
    sigma = (t(AB, "1", 0, 1), t(AB, "1", 1, 1))
    assert peiffer_reduce(AB, sigma) == sigma


def test_peiffer_reduce_moves_middle_term_out():
    p = parse_presentation("gens: a b\nrel 1: a\nrel 2: b\n")
    sigma = (t(p, "1", 0, 1), t(p, "b", 1, 1), t(p, "1", 0, -1))
    out = peiffer_reduce(p, sigma)
    assert len(out) == 1
    assert product(p, out) == product(p, sigma)


def test_equivalence_trivial_and_palindrome():
    sigma = (t(AB, "1", 0, 1), t(AB, "b", 1, 1))
    res = peiffer_equivalent_bounded(AB, sigma, sigma)
    assert isinstance(res, Equivalent) and res.script == ()
    res = peiffer_equivalent_bounded(AB, sigma + inverse_sequence(sigma), ())
    assert isinstance(res, Equivalent)
    assert replay(AB, sigma + inverse_sequence(sigma), res.script) == ()


def test_equivalence_product_short_circuit():
    res = peiffer_equivalent_bounded(AB, (t(AB, "1", 0, 1),), (t(AB, "1", 1, 1),))
    assert isinstance(res, NotEquivalent)


def test_equivalence_script_replays():
    sigma = (t(AB, "1", 0, 1), t(AB, "1", 1, 1))
    tau = apply_peiffer(AB, sigma, Ex(0, "left"))
    res = peiffer_equivalent_bounded(AB, sigma, tau)
    assert isinstance(res, Equivalent)
    assert normalize(replay(AB, sigma, res.script)) == normalize(tau)


def test_boundary_alias():
    sigma = (t(AB, "b", 0, 1),)
    assert boundary(AB, sigma) == product(AB, sigma)


# --- eta ---------------------------------------------------------------


def test_eta_image_simple_cancel():
    sigma = (t(AB, "1", 1, 1), t(AB, "1", 0, 1), t(AB, "1", 0, -1), t(AB, "1", 1, -1))
    assert eta_image(AB, sigma, 1) == EMPTY


def test_eta_image_requires_identity_sequence():
    with pytest.raises(NotIdentitySequence):
        eta_image(AB, (t(AB, "1", 0, 1),), 1)


def test_eta_of_trivial_sequence_is_trivial():
    zeta = trivial_sequence(A3, 0)
    assert eta_image(A3, zeta, 1) == EMPTY


def test_eta_image_commutator_example():
    sigma = (
        t(AB, "1", 0, 1),
        t(AB, "b", 0, 1),
        t(AB, "1", 0, -1),
        t(AB, "b", 0, -1),
        t(AB, "1", 1, 1),
        t(AB, "a", 1, -1),
        t(AB, "aa", 1, 1),
        t(AB, "a", 1, -1),
    )
    # independent check by direct free multiplication of the two halves
    first = free_reduce(raw_product(AB, sigma[:4]))
    second = free_reduce(raw_product(AB, sigma[4:]))
    assert free_reduce(first + second) == EMPTY
    expected = w(AB, "abaBAbAB")
    assert first == expected
    assert eta_image(AB, sigma, 1) == expected


def test_eta_certificate_del_free_equality():
    sigma = (t(AB, "1", 0, 1), t(AB, "1", 0, -1))
    cert = eta_certificate(AB, sigma, Del(0), 1)
    assert cert.factors == (FreeEquality(),)
    assert cert.verify(AB)


def test_eta_certificate_ex_commutator():
    # swap an r1-term past an r2-term at the end: B empty, delta = [a⁻¹, b⁻¹]
    sigma = (
        t(AB, "1", 1, 1),
        t(AB, "1", 0, 1),
        t(AB, "1", 1, 1),
        t(AB, "1", 1, -1),
        t(AB, "1", 0, -1),
        t(AB, "1", 1, -1),
    )
    assert is_identity_sequence(AB, sigma)
    cert = eta_certificate(AB, sigma, Ex(1, "left"), 1)
    assert len(cert.factors) == 1 and isinstance(cert.factors[0], Commutator)
    # old V = a·a⁻¹ = 1, new V = (b⁻¹ab)·a⁻¹; delta must expand to exactly that
    delta = cert.factors[0].expansion(AB)
    assert free_reduce(cert.old_V + delta) == cert.new_V
    assert cert.verify(AB)


def test_eta_certificate_ex_within_family_free():
    sigma = (t(AB, "1", 0, 1), t(AB, "b", 0, 1)) + inverse_sequence(
        (t(AB, "1", 0, 1), t(AB, "b", 0, 1))
    )
    cert = eta_certificate(AB, sigma, Ex(0, "left"), 1)
    assert cert.factors == (FreeEquality(),)
    assert cert.verify(AB)


def test_eta_certificates_randomized():
    rng = random.Random(11)
    for _ in range(300):
        p = rng.choice([AB, AB_SHARED])
        half = _random_sequence(p, rng, max_terms=4)
        sigma = half + inverse_sequence(half)
        if not sigma:
            continue
        op = _random_op(p, sigma, rng)
        try:
            cert = eta_certificate(p, sigma, op, 1)
        except PreconditionViolated:
            continue
        assert cert.verify(p)


def test_eta_shared_relator_warning():
    shared = AB_SHARED
    sigma = (t(shared, "1", 1, 1), t(shared, "1", 1, -1))
    with pytest.warns(RuntimeWarning):
        eta_image(shared, sigma, 1)


def test_sequence_text_round_trip():
    sigma = (t(AB, "b", 0, 1), t(AB, "1", 1, -1))
    text = sequence_text(sigma, AB)
    assert text == "b 1 +\n1 2 -\n"
    assert parse_sequence(text, AB) == sigma
