import random

import pytest
from hypothesis import given, settings, strategies as st

from soalab.classes import MorphismClass, _comma_iso, fp_injectivity_test
from soalab.errors import Truncated, VariantMismatch
from soalab.fpmod import (FpModule, Ring, canonical_form, compose, equals, identity, is_iso, is_mono,
                          is_split_mono, isomorphic, morphism, pushout, random_automorphism, zero_module,
                          zero_morphism)
from soalab.lifting import is_pure_mono, lifts, lifts_uniquely, random_square
from soalab.soa import (EngineConfig, advance_stage, functorial_transport, orthogonal_factorize,
                        orthogonal_factorize_one_step, orthogonal_reflect, run_factorization, stage_cone,
                        weak_reflect)
from strategies import morphisms

R4 = Ring.Zmod(4)
Z2, Z4 = FpModule.cyclic(R4, 2), FpModule.cyclic(R4, 4)
DOUBLE = morphism(Z2, Z4, [[2]])
QUOT = morphism(Z4, Z2, [[1]])


def _to_zero(A):
    return zero_morphism(A, zero_module(A.ring))


# -- configuration -------------------------------------------------------------------

def test_config_validation():
    with pytest.raises(ValueError):
        EngineConfig(variant="sloppy")
    with pytest.raises(ValueError):
        EngineConfig(stop_rule="never")
    with pytest.raises(ValueError):
        EngineConfig(max_stage=0)
    assert EngineConfig(generators=[DOUBLE]).gens == (DOUBLE,)


# -- cones -----------------------------------------------------------------------------

def test_empty_generators_give_empty_cone():
    assert stage_cone(_to_zero(Z2), EngineConfig()).empty


def test_two_squares_for_z2_to_zero():
    cone = stage_cone(_to_zero(Z2), EngineConfig(generators=[DOUBLE], cone="all"))
    assert cone.exhaustive and len(cone.squares) == 2
    assert sorted(q.s.cmat for q in cone.squares) == [((0,),), ((1,),)]
    # the zero square already has a diagonal; only the identity square gets a cell
    assert [q.s.cmat for q in cone.legs] == [((1,),)]


def test_loose_cone_records_merges():
    cone = stage_cone(_to_zero(Z2), EngineConfig(generators=[DOUBLE], variant="loose", cone="all"))
    assert len(cone.squares) == 2
    assert len(cone.legs) + len(cone.dedup_record) + len(cone.redundant) <= 2
    assert len(cone.legs) == 1


def test_first_stage_of_z2_to_zero():
    f = _to_zero(Z2)
    cfg = EngineConfig(generators=[DOUBLE], cone="all")
    st0 = advance_stage(Z2, f, stage_cone(f, cfg))
    assert 32 % st0.A_next.order == 0
    assert is_mono(st0.g) and isomorphic(st0.A_next, Z4)
    assert all(s.verify() for s in st0.steps)


def test_empty_cone_stage_is_identity():
    f = _to_zero(Z4)
    cone = stage_cone(f, EngineConfig(generators=[DOUBLE]))
    st0 = advance_stage(Z4, f, cone)
    assert cone.empty and is_iso(st0.g)


def test_single_square_stage_is_a_pushout():
    f = _to_zero(Z2)
    cone = stage_cone(f, EngineConfig(generators=[DOUBLE]))
    st0 = advance_stage(Z2, f, cone)
    q = cone.legs[0]
    expected = pushout(DOUBLE, q.s).leg_right
    assert _comma_iso(expected, st0.g) is not None


# -- runs ----------------------------------------------------------------------------------

def test_no_generators():
    f = QUOT
    t = run_factorization(f, EngineConfig())
    assert t.stages == [] and equals(t.f_lambda, f) and equals(t.f_star, identity(f.dom))


@settings(max_examples=25)
@given(morphisms(ring=R4, bound=16))
def test_run_invariants(f):
    t = run_factorization(f, EngineConfig(generators=[DOUBLE]))
    assert equals(compose(t.f_lambda, t.f_star), f)
    assert t.verify()
    assert lifts(DOUBLE, t.f_lambda)
    assert is_mono(t.f_star)


def test_truncation_carries_trace():
    f = zero_morphism(zero_module(R4), Z4)
    with pytest.raises(Truncated) as info:
        run_factorization(f, EngineConfig(generators=[DOUBLE], max_stage=1))
    t = info.value.trace
    assert len(t.stages) == 1 and t.reason == "truncated" and t.limit is not None


def test_stop_rules_agree_on_result():
    f = _to_zero(Z2)
    a = run_factorization(f, EngineConfig(generators=[DOUBLE], stop_rule="iso"))
    b = run_factorization(f, EngineConfig(generators=[DOUBLE], stop_rule="box_certified"))
    assert isomorphic(a.f_star.cod, b.f_star.cod)
    assert lifts(DOUBLE, b.f_lambda)


def test_universe_generators_strict_and_loose(U8):
    gens = U8.arrow_representatives
    for f in (QUOT, DOUBLE, _to_zero(Z2)):
        strict = run_factorization(f, EngineConfig(generators=gens))
        assert is_iso(strict.f_lambda)
        loose = run_factorization(f, EngineConfig(generators=gens, variant="loose"))
        assert is_split_mono(loose.f_lambda) is not None
        assert is_pure_mono(loose.f_lambda).pure


# -- discard variant ----------------------------------------------------------------------------

@settings(max_examples=15)
@given(morphisms(ring=R4, bound=8))
def test_discard_matches_strict(f):
    s = run_factorization(f, EngineConfig(generators=[DOUBLE]))
    d = run_factorization(f, EngineConfig(generators=[DOUBLE], variant="discard"))
    assert d.discard_log == []
    assert len(s.stages) == len(d.stages)
    for a, b in zip(s.stages, d.stages):
        assert equals(a.g, b.g) and equals(a.f_next, b.f_next)


def _collapsing_pushout(m, x):
    """Stub: push out the map dom m -> 0 instead, so the new leg is a quotient."""
    return pushout(zero_morphism(m.dom, zero_module(m.dom.ring)), x)


def test_discard_path_negative_control():
    f = _to_zero(Z2)
    cfg = EngineConfig(generators=[DOUBLE], variant="discard", max_stage=2)
    with pytest.raises(Truncated) as info:
        run_factorization(f, cfg, pushout_fn=_collapsing_pushout)
    t = info.value.trace
    assert t.discard_log
    assert all(is_iso(s.p) for st in t.stages for s in st.steps if s.discarded)
    assert t.verify()


# -- order independence -----------------------------------------------------------------------------

@settings(max_examples=10)
@given(morphisms(ring=R4, bound=8), st.integers(0, 2 ** 32 - 1))
def test_stage_independent_of_order(f, seed):
    cfg = EngineConfig(generators=[DOUBLE, QUOT], cone="all")
    cone = stage_cone(f, cfg)
    base = advance_stage(f.dom, f, cone)
    rng = random.Random(seed)
    for _ in range(5):
        order = list(range(len(cone.legs)))
        rng.shuffle(order)
        other = advance_stage(f.dom, f, cone, order=order)
        assert canonical_form(other.A_next) == canonical_form(base.A_next)
        assert _comma_iso(base.g, other.g) is not None


# -- reflections --------------------------------------------------------------------------------------

def test_weak_reflect_z2(U16):
    r = weak_reflect(Z2, EngineConfig(generators=[DOUBLE]))
    assert r.unit_mono and r.in_class
    assert fp_injectivity_test(r.A_star, U16)


def test_weak_reflect_injective_is_iso():
    assert is_iso(weak_reflect(Z4, EngineConfig(generators=[DOUBLE])).unit)


def test_weak_reflect_zero():
    O = zero_module(R4)
    assert is_iso(weak_reflect(O, EngineConfig(generators=[DOUBLE])).unit)


# -- functoriality ---------------------------------------------------------------------------------------

def test_transport_identity():
    f = _to_zero(Z2)
    t = run_factorization(f, EngineConfig(generators=[DOUBLE]))
    w = functorial_transport(identity(f.dom), identity(f.cod), t, t)
    assert equals(w, identity(t.f_star.cod))


@settings(max_examples=15)
@given(morphisms(ring=R4, bound=8), morphisms(ring=R4, bound=8), st.integers(0, 2 ** 32 - 1))
def test_transport_random_squares(f, f2, seed):
    sq = random_square(f, f2, random.Random(seed))
    cfg = EngineConfig(generators=[DOUBLE])
    t1, t2 = run_factorization(f, cfg), run_factorization(f2, cfg)
    w = functorial_transport(sq.u, sq.v, t1, t2)
    assert equals(compose(w, t1.f_star), compose(t2.f_star, sq.u))
    assert equals(compose(t2.f_lambda, w), compose(sq.v, t1.f_lambda))


def test_transport_of_isos_is_iso():
    M = FpModule.from_invariants(R4, [2, 4])
    f = _to_zero(M)
    a = random_automorphism(M, random.Random(3))
    cfg = EngineConfig(generators=[DOUBLE])
    t = run_factorization(f, cfg)
    w = functorial_transport(a, identity(f.cod), t, t)
    assert is_iso(w)


def test_transport_rejects_loose():
    f = _to_zero(Z2)
    t = run_factorization(f, EngineConfig(generators=[DOUBLE], variant="loose"))
    with pytest.raises(VariantMismatch):
        functorial_transport(identity(Z2), identity(f.cod), t, t)


# -- orthogonal factorization --------------------------------------------------------------------------------

def test_orthogonal_no_generators():
    h, g = orthogonal_factorize_one_step(DOUBLE, [])
    assert is_iso(h) and equals(g, DOUBLE)


def test_orthogonal_quotient():
    h, g, info = orthogonal_factorize(QUOT, [QUOT])
    assert info["stable"] and is_iso(g) and isomorphic(h.cod, Z2)


def test_orthogonal_domain_already_local():
    # dom is exponent 2, so nothing is collapsed
    h, g, info = orthogonal_factorize(DOUBLE, [QUOT])
    assert info["stable"] and is_iso(h) and lifts_uniquely(QUOT, g)


@pytest.mark.parametrize("orders,expected", [([4], [2]), ([2, 4], [2, 2]), ([4, 4], [2, 2]), ([2], [2]), ([], [])])
def test_orthogonal_reflect_is_mod_two(orders, expected):
    A = FpModule.from_invariants(R4, orders)
    unit, target = orthogonal_reflect(A, [QUOT])
    assert canonical_form(target)[1] == expected
    assert is_mono(unit) == (A.exponent <= 2)


def test_class_generators_accepted():
    C = MorphismClass((QUOT,), ("fc",))
    h, g, info = orthogonal_factorize(QUOT, C)
    assert info["stable"]
