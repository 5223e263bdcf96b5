import random

import pytest
from hypothesis import assume, given, settings, strategies as st

from soalab.errors import NonCommutingSquare, NotMono
from soalab.fpmod import (FpModule, Ring, compose, equals, hom_count, identity, is_iso, is_split_mono,
                          iso_classes, morphism, zero_module, zero_morphism)
from soalab.lifting import (Exhaustive, Explicit, ExtensionProblem, LiftingSquare, brute_extensions,
                            brute_injective, brute_lifts, diagonals, extensions,
                            has_unique_lifting, is_injective_wrt, is_orthogonal_to, is_pure_mono, lifts,
                            lifts_uniquely, oracle_check, random_square, square_generators)
from strategies import morphisms, spans


# -- examples ------------------------------------------------------------------

def test_doubling_does_not_extend_identity(Z2, double):
    assert not extensions(ExtensionProblem(double, identity(Z2)))
    assert brute_extensions(ExtensionProblem(double, identity(Z2))) == []


def test_z4_injective_not_orthogonal(Z4, double):
    assert is_injective_wrt(Z4, double)
    assert not is_orthogonal_to(Z4, double)


def test_z2_not_injective(Z2, double):
    assert not is_injective_wrt(Z2, double)


def test_quotient_lifts_uniquely_against_zero_map(Z2, quotient, R4):
    to_zero = zero_morphism(Z2, zero_module(R4))
    assert lifts_uniquely(quotient, to_zero)


def test_non_commuting_square_rejected(Z2, Z4, double):
    with pytest.raises(NonCommutingSquare):
        LiftingSquare(double, identity(Z4), double, zero_morphism(Z4, Z4))


def test_isos_lift_against_everything(U8):
    isos = [m for m in U8.arrow_representatives if is_iso(m)]
    assert len(isos) >= len(U8.objects)
    for p in U8.arrow_representatives:
        for i in isos:
            assert lifts(p, i) and lifts(i, p)


def test_square_generators_commute(double, quotient):
    for u, v in square_generators(double, quotient):
        assert equals(compose(v, double), compose(quotient, u))


def test_unique_lifting(Z4, Z2, quotient):
    sq = LiftingSquare(identity(Z4), quotient, identity(Z4), quotient)
    w = has_unique_lifting(sq)
    assert w is not None and equals(w, identity(Z4))


# -- properties -------------------------------------------------------------

@given(spans(bound=8))
def test_extension_oracle(span):
    n, u = span
    assert oracle_check(ExtensionProblem(n, u)).agree


@given(spans(bound=8), st.integers(0, 2 ** 32 - 1))
def test_sampled_extension_is_solution(span, seed):
    n, u = span
    sols = extensions(ExtensionProblem(n, u))
    w = sols.sample(random.Random(seed))
    assert (w is None) == sols.empty
    if w is not None:
        assert equals(compose(w, n), u)


@given(st.data(), st.integers(0, 2 ** 32 - 1))
def test_lifting_oracle(data, seed):
    p = data.draw(morphisms(bound=8))
    i = data.draw(morphisms(ring=p.dom.ring, bound=8))
    sq = random_square(p, i, random.Random(seed))
    assert oracle_check(sq).agree


@settings(max_examples=40)
@given(morphisms(ring=Ring.Zmod(4), bound=8), morphisms(ring=Ring.Zmod(4), bound=8))
def test_lifts_matches_brute_force(p, i):
    assume(hom_count(p.dom, i.dom) * hom_count(p.cod, i.cod) <= 4096)
    assert lifts(p, i) == brute_lifts(p, i)


@settings(max_examples=40)
@given(morphisms(ring=Ring.Zmod(4), bound=8), st.sampled_from(iso_classes(Ring.Zmod(4), 8)))
def test_injectivity_matches_brute_force(n, K):
    assume(hom_count(n.dom, K) * hom_count(n.cod, K) <= 4096)
    assert is_injective_wrt(K, n) == brute_injective(K, n)


@given(st.data())
def test_right_class_closed_under_composition(data):
    R = Ring.Zmod(4)
    p = data.draw(morphisms(ring=R, bound=4))
    i = data.draw(morphisms(ring=R, bound=4))
    j = data.draw(morphisms(ring=R, bound=4, dom=i.cod))
    if lifts(p, i) and lifts(p, j):
        assert lifts(p, compose(j, i))


def test_lifting_solutions_form_coset(double, quotient, Z4, Z2):
    sq = LiftingSquare(identity(Z4), identity(Z4), identity(Z4), identity(Z4))
    d = diagonals(sq)
    assert len(d) == 1 and equals(d.particular, identity(Z4))


# -- oracle negative control ------------------------------------------------------

def test_corrupted_solver_is_caught(Z4, double):
    prob = ExtensionProblem(double, double)
    report = oracle_check(prob, solver=lambda pr: extensions(pr).explicit()[:-1])
    assert not report.agree and "missed" in report.note
    report = oracle_check(prob, solver=lambda pr: [identity(Z4), zero_morphism(Z4, Z4)])
    assert not report.agree and "non-solution" in report.note
    assert str(oracle_check(prob)) == "agree"


# -- purity ---------------------------------------------------------------------------

def test_doubling_not_pure(double):
    res = is_pure_mono(double)
    assert not res.pure and res.witness is not None


def test_split_inclusion_pure(R4):
    Z2, M = FpModule.cyclic(R4, 2), FpModule.from_invariants(R4, [2, 4])
    assert is_pure_mono(morphism(Z2, M, [[1], [0]])).pure


def test_purity_needs_mono(quotient):
    with pytest.raises(NotMono):
        is_pure_mono(quotient)


def test_pure_equals_split_on_small_monos(U8):
    for m in U8.monos():
        assert is_pure_mono(m).pure == (is_split_mono(m) is not None)


def test_pure_equals_split_up_to_sixteen(U16):
    # test maps up to order 16; order 64 is out of reach (see the decisions ledger)
    for m in U16.monos():
        assert is_pure_mono(m, Exhaustive(16)).pure == (is_split_mono(m) is not None)


def test_explicit_family(double, Z2, Z4):
    assert is_pure_mono(double, Explicit((identity(Z2),))).pure
    assert not is_pure_mono(double, Explicit((double,))).pure


def test_exhaustive_family_up_to_iso_agrees(double, R4):
    full = is_pure_mono(double, Exhaustive(4, up_to_iso=False))
    reduced = is_pure_mono(double, Exhaustive(4))
    assert full.pure == reduced.pure
