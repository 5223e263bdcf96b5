import pytest

from soalab.classes import MorphismClass
from soalab.errors import NotMono
from soalab.fpmod import FpModule, identity, is_iso, is_mono, morphism, subgroups
from soalab.lifting import lifts
from soalab.soa import EngineConfig, run_factorization
from soalab.wfscheck import (ISO, MOR, Side, check_factorization_system, check_wfs_axioms,
                             effective_unions_check, effective_unions_sweep, injectivity_decomposition_check,
                             mono_chain_check, orthogonal_factorizer, right_polar, soa_factorizer,
                             transferability_check, trivial_left_factorizer, trivial_right_factorizer)


def test_mor_iso(U8):
    rep = check_wfs_axioms(MOR, ISO, U8, trivial_left_factorizer)
    assert rep.passed, rep.to_markdown()
    assert rep.bounds["morphisms_checked"] == 98


def test_iso_mor(U8):
    assert check_wfs_axioms(ISO, MOR, U8, trivial_right_factorizer).passed


def test_mor_iso_unique(U8):
    assert check_factorization_system(MOR, ISO, U8, trivial_left_factorizer).passed


def test_cof_pair(U8, double):
    E = MorphismClass((double,), ("po", "ch", "re"), "Cof(M)")
    rep = check_wfs_axioms(E, right_polar([double], name="M^□"), U8,
                           soa_factorizer(EngineConfig(generators=[double])))
    assert rep.passed, rep.to_markdown()


def test_orthogonal_pair(U8, quotient):
    E = MorphismClass((quotient,), ("fc",), "Fc(q)")
    rep = check_factorization_system(E, right_polar([quotient], True, "q^↓"), U8, orthogonal_factorizer([quotient]))
    assert rep.passed, rep.to_markdown()


def test_right_class_missing_a_member_fails(U8, double):
    full = right_polar([double])
    dropped = next(f for f in U8.arrow_representatives if full(f) and not is_iso(f))
    short = Side("M^□ minus one", lambda f: full(f) and f is not dropped)
    E = MorphismClass((double,), ("po", "ch", "re"), "Cof(M)")
    rep = check_wfs_axioms(E, short, U8, soa_factorizer(EngineConfig(generators=[double])),
                           morphisms=U8.arrow_representatives)
    assert not rep.right_polar_ok
    witnesses = [c for c in rep.counterexamples if c.axiom == "right"]
    assert [c.f for c in witnesses] == [dropped]
    assert all(r() for r in rep.replays)


def test_wrong_left_class_fails(U8):
    rep = check_wfs_axioms(ISO, ISO, U8, trivial_left_factorizer)
    assert not rep.passed
    assert all(r() for r in rep.replays)


def test_report_serializes(U8):
    rep = check_wfs_axioms(MOR, ISO, U8, trivial_left_factorizer)
    d = rep.to_dict()
    assert d["passed"] and d["pair"] == ["Mor", "Iso"]
    assert "weak factorization system" in rep.to_markdown()


def test_recheck_inclusion(U8, double):
    # members certified by chains of pushouts lift against the right polar
    from soalab.classes import ch_membership
    right = [f for f in U8.arrow_representatives if lifts(double, f)]
    for f in U8.arrow_representatives:
        if ch_membership(f, [double], k=2).status == "member":
            assert all(lifts(f, g) for g in right)


# -- effective unions -------------------------------------------------------------------

def test_union_of_equal_subobjects(R4):
    B = FpModule.from_invariants(R4, [2, 4])
    b0 = subgroups(B)[2]
    w = effective_unions_check(b0, b0)
    assert w.mono and w.pullback_apex.order == b0.dom.order


def test_two_lines_in_the_klein_group(R4):
    Z2 = FpModule.cyclic(R4, 2)
    V = FpModule.from_invariants(R4, [2, 2])
    a, b = morphism(Z2, V, [[1], [0]]), morphism(Z2, V, [[0], [1]])
    w = effective_unions_check(a, b)
    assert w.pullback_apex.order == 1 and w.pushout_apex.order == 4 and is_iso(w.h)
    assert effective_unions_check(a, b, pure=True).pure


def test_unions_need_monos(quotient):
    with pytest.raises(NotMono):
        effective_unions_check(quotient, quotient)


def test_sweeps_on_small_universe(U8):
    assert effective_unions_sweep(U8).passed
    rep = transferability_check(U8)
    assert rep.passed and rep.checked > 0


def test_pure_unions_report_is_honest(U8):
    # two summands can sum to a non-summand (Z/2 + Z/4 holds one), so the pure sweep must report it
    rep = effective_unions_sweep(U8, pure=True)
    assert rep.checked > 0 and not rep.passed
    for w in rep.failures:
        assert w.mono and w.pure is False and w.split is False
    assert any(w.b0.cod.orders == (2, 4) for w in rep.failures)


def test_sum_of_summands_not_summand(R4, Z2):
    from soalab.fpmod import is_split_mono
    B = FpModule.from_invariants(R4, [2, 4])
    a = morphism(Z2, B, [[1], [0]])
    b = morphism(Z2, B, [[1], [2]])
    assert is_split_mono(a) is not None and is_split_mono(b) is not None
    w = effective_unions_check(a, b, pure=True)
    assert w.mono and w.pure is False and w.split is False
    assert effective_unions_check(a, b).ok


def test_identity_pushout_keeps_mono(double, Z2):
    from soalab.fpmod import pushout
    assert is_mono(pushout(double, identity(Z2)).leg_right)


def test_mono_chain_check(U8, double, quotient):
    traces = [run_factorization(f, EngineConfig(generators=[double])) for f in U8.arrow_representatives[:20]]
    rep = mono_chain_check(traces)
    assert rep.passed and rep.checked == 20
    other = run_factorization(quotient, EngineConfig(generators=[quotient]))
    assert mono_chain_check([other]).checked == 0


def test_injectivity_decomposition(U8, R4):
    rep = injectivity_decomposition_check(U8)
    assert rep.passed
    rows = {r[0]: r[1:] for r in rep.notes["rows"]}
    assert rows["Z/4"] == (True, True, True)
    assert rows["Z/2"][0] is False and rows["Z/2"][1] is False
    assert rows["0"] == (True, True, True)
