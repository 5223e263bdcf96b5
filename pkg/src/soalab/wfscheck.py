"""Checks of (weak) factorization system axioms and of transferability,
effective unions and injectivity splitting on finite universes.

Every reported failure keeps the morphisms involved so it can be replayed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .classes import MorphismClass, Universe, class_membership
from .errors import NotMono
from .fpmod import (FpModule, FpMorphism, compose, equals, hom_enumerate, identity,
                    is_iso, is_mono, is_split_mono, normalize, orbit_representatives, pullback, pushout,
                    subgroups)
from .lifting import Exhaustive, is_injective_wrt, is_pure_mono, lifts, lifts_uniquely


# ---------------------------------------------------------------------------
# Class sides and factorizers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Side:
    """A morphism class given by a membership predicate."""
    name: str
    test: Callable[[FpMorphism], bool]

    def __call__(self, f: FpMorphism) -> bool:
        return bool(self.test(f))


MOR = Side("Mor", lambda f: True)
ISO = Side("Iso", is_iso)


def right_polar(gens: Sequence[FpMorphism], unique: bool = False, name: str = "") -> Side:
    rel = lifts_uniquely if unique else lifts
    return Side(name or ("{...}^↓" if unique else "{...}^□"), lambda i: all(rel(p, i) for p in gens))


def class_side(C: MorphismClass, U: Optional[Universe] = None) -> Side:
    return Side(C.name or f"closure{list(C.closure)}", lambda f: class_membership(f, C, U))


def _as_side(x) -> Side:
    if isinstance(x, Side):
        return x
    if isinstance(x, MorphismClass):
        return class_side(x)
    if callable(x):
        return Side(getattr(x, "__name__", "predicate"), x)
    raise TypeError(f"cannot use {x!r} as a morphism class")


@dataclass
class Factorization:
    left: FpMorphism
    right: FpMorphism


def trivial_right_factorizer(f: FpMorphism) -> Factorization:
    """f = f∘1, for (Iso, Mor)."""
    return Factorization(identity(f.dom), f)


def trivial_left_factorizer(f: FpMorphism) -> Factorization:
    """f = 1∘f, for (Mor, Iso)."""
    return Factorization(f, identity(f.cod))


def soa_factorizer(cfg) -> Callable[[FpMorphism], Factorization]:
    from .soa import run_factorization

    def run(f):
        t = run_factorization(f, cfg)
        return Factorization(t.f_star, t.f_lambda)
    return run


def orthogonal_factorizer(gens: Sequence[FpMorphism], max_stage: int = 8) -> Callable[[FpMorphism], Factorization]:
    from .soa import orthogonal_factorize

    def run(f):
        h, g, _ = orthogonal_factorize(f, gens, max_stage)
        return Factorization(h, g)
    return run


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass
class Counterexample:
    axiom: str
    f: FpMorphism
    detail: str
    partner: Optional[FpMorphism] = None

    def to_dict(self) -> dict:
        d = {"axiom": self.axiom, "f": repr(self.f), "detail": self.detail}
        if self.partner is not None:
            d["partner"] = repr(self.partner)
        return d


@dataclass
class WfsReport:
    pair: tuple[str, str]
    unique: bool
    left_polar_ok: bool = True
    right_polar_ok: bool = True
    factorization_ok: bool = True
    counterexamples: list[Counterexample] = field(default_factory=list)
    bounds: dict = field(default_factory=dict)
    replays: list[Callable[[], bool]] = field(default_factory=list, repr=False)

    @property
    def passed(self) -> bool:
        return self.left_polar_ok and self.right_polar_ok and self.factorization_ok

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {"pair": list(self.pair), "unique": self.unique, "passed": self.passed,
                "left_polar_ok": self.left_polar_ok, "right_polar_ok": self.right_polar_ok,
                "factorization_ok": self.factorization_ok, "bounds": self.bounds,
                "counterexamples": [c.to_dict() for c in self.counterexamples]}

    def to_markdown(self) -> str:
        kind = "factorization system" if self.unique else "weak factorization system"
        lines = [f"## ({self.pair[0]}, {self.pair[1]}) as a {kind}", "",
                 f"- left class equals left polar: {'yes' if self.left_polar_ok else 'NO'}",
                 f"- right class equals right polar: {'yes' if self.right_polar_ok else 'NO'}",
                 f"- every morphism factors: {'yes' if self.factorization_ok else 'NO'}",
                 f"- bounds: {self.bounds}"]
        for c in self.counterexamples:
            lines.append(f"- counterexample ({c.axiom}): {c.f!r}: {c.detail}")
        return "\n".join(lines)


def _check_pair(E, M, U: Universe, factorizer, unique: bool,
                morphisms: Optional[Sequence[FpMorphism]] = None) -> WfsReport:
    E, M = _as_side(E), _as_side(M)
    rel = lifts_uniquely if unique else lifts
    mors = list(morphisms) if morphisms is not None else U.arrow_representatives
    rep = WfsReport((E.name, M.name), unique,
                    bounds={"universe": U.describe(), "morphisms_checked": len(mors), "up_to_iso": morphisms is None})
    in_E = {i: E(f) for i, f in enumerate(mors)}
    in_M = {i: M(f) for i, f in enumerate(mors)}
    E_list = [mors[i] for i in in_E if in_E[i]]
    M_list = [mors[i] for i in in_M if in_M[i]]

    # axiom (1): left class = morphisms lifting against the right class
    for i, f in enumerate(mors):
        blocker = next((m for m in M_list if not rel(f, m)), None)
        if in_E[i] and blocker is not None:
            rep.left_polar_ok = False
            rep.counterexamples.append(Counterexample("left", f, "in the left class but fails to lift", blocker))
            rep.replays.append(lambda f=f, m=blocker: not rel(f, m))
        elif not in_E[i] and blocker is None:
            rep.left_polar_ok = False
            rep.counterexamples.append(Counterexample("left", f, "lifts against the right class but is not in the left class"))
            rep.replays.append(lambda f=f: not E(f) and all(rel(f, m) for m in M_list))

    # axiom (2): right class = morphisms lifted against by the left class
    for i, g in enumerate(mors):
        blocker = next((e for e in E_list if not rel(e, g)), None)
        if in_M[i] and blocker is not None:
            rep.right_polar_ok = False
            rep.counterexamples.append(Counterexample("right", g, "in the right class but a left map fails to lift", blocker))
            rep.replays.append(lambda g=g, e=blocker: not rel(e, g))
        elif not in_M[i] and blocker is None:
            rep.right_polar_ok = False
            rep.counterexamples.append(Counterexample("right", g, "every left map lifts against it but it is not in the right class"))
            rep.replays.append(lambda g=g: not M(g) and all(rel(e, g) for e in E_list))

    # axiom (3): factorizations with certified pieces
    for f in mors:
        fac = factorizer(f)
        ok = equals(compose(fac.right, fac.left), f) and E(fac.left) and M(fac.right)
        if not ok:
            rep.factorization_ok = False
            rep.counterexamples.append(Counterexample("factorization", f, "factorization missing or not certified"))
            rep.replays.append(lambda f=f: not (E(factorizer(f).left) and M(factorizer(f).right)))
    return rep


def check_wfs_axioms(E, M, U: Universe, factorizer, morphisms=None) -> WfsReport:
    return _check_pair(E, M, U, factorizer, False, morphisms)


def check_factorization_system(E, M, U: Universe, factorizer, morphisms=None) -> WfsReport:
    return _check_pair(E, M, U, factorizer, True, morphisms)


# ---------------------------------------------------------------------------
# Effective unions and transferability
# ---------------------------------------------------------------------------

@dataclass
class UnionWitness:
    b0: FpMorphism
    g: FpMorphism
    pullback_apex: FpModule
    pushout_apex: FpModule
    h: FpMorphism
    mono: bool
    pure: Optional[bool] = None
    split: Optional[bool] = None

    @property
    def ok(self) -> bool:
        return self.mono and self.pure is not False

    def __bool__(self) -> bool:
        return self.ok


def effective_unions_check(b0: FpMorphism, g: FpMorphism, pure: bool = False,
                           family=Exhaustive(8)) -> UnionWitness:
    """Pull back two subobjects of B, push the projections out, test the induced map to B."""
    if not (is_mono(b0) and is_mono(g)):
        raise NotMono("effective unions take two monomorphisms")
    pb = pullback(b0, g)
    po = pushout(pb.proj_left, pb.proj_right)
    h = po.mediator(b0, g)
    mono = is_mono(h)
    w = UnionWitness(b0, g, pb.apex, po.apex, h, mono)
    if pure and mono:
        w.pure = bool(is_pure_mono(h, family))
        w.split = is_split_mono(h) is not None
    return w


@dataclass
class SweepReport:
    name: str
    checked: int = 0
    failures: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {"check": self.name, "passed": self.passed, "checked": self.checked,
                "failures": [repr(f) for f in self.failures], **self.notes}


def effective_unions_sweep(U: Universe, pure: bool = False, family=Exhaustive(8)) -> SweepReport:
    """Every unordered pair of subobjects of every universe object."""
    rep = SweepReport("effective_unions" + ("_pure" if pure else ""),
                      notes={"universe": U.describe(), "monos": "subgroup inclusions"})
    if pure:
        rep.notes["purity"] = f"lifting against {family!r}, split cross-check recorded per failure"
    for B in U.objects:
        subs = subgroups(B)
        pure_ok = [_is_pure(m, family) for m in subs] if pure else None
        for i, a in enumerate(subs):
            for j in range(i, len(subs)):
                b = subs[j]
                if pure and not (pure_ok[i] and pure_ok[j]):
                    continue
                w = effective_unions_check(a, b, pure, family)
                rep.checked += 1
                if not w.ok:
                    rep.failures.append(w)
    return rep


def _is_pure(m, family) -> bool:
    return bool(is_pure_mono(m, family))


def transferability_check(U: Universe) -> SweepReport:
    """Push every mono into U along every map out of its domain into U; the parallel leg must be mono.

    Monos are subgroup inclusions and the attaching maps are taken up to
    automorphisms of their codomain, which covers every span up to isomorphism.
    """
    rep = SweepReport("transferability", notes={"universe": U.describe()})
    cache: dict = {}
    for B in U.objects:
        for m in subgroups(B):
            fwd, _ = normalize(m.dom)
            S = fwd.cod
            key = S.orders
            if key not in cache:
                cache[key] = (S, [(C, orbit_representatives(hom_enumerate(S, C), U.automorphisms(C)))
                                  for C in U.objects])
            _, per_C = cache[key]
            for C, maps in per_C:
                for g0 in maps:
                    g = compose(g0, fwd)
                    po = pushout(m, g)
                    rep.checked += 1
                    if not is_mono(po.leg_right):
                        rep.failures.append((m, g))
    return rep


def mono_chain_check(traces: Iterable) -> SweepReport:
    """Each stage map and each f_star of traces with mono generators is mono."""
    rep = SweepReport("mono_chains")
    for t in traces:
        if not all(is_mono(m) for m in t.config.gens):
            continue
        rep.checked += 1
        bad = [st.index for st in t.stages if not is_mono(st.g)]
        if bad or not is_mono(t.f_star):
            rep.failures.append((t.f, bad))
    return rep


# ---------------------------------------------------------------------------
# Injective = FP-injective and pure-injective
# ---------------------------------------------------------------------------

@dataclass
class DecompositionRow:
    K: FpModule
    injective: bool
    fp_injective: bool
    pure_injective: bool

    @property
    def agrees(self) -> bool:
        return self.injective == (self.fp_injective and self.pure_injective)


def injectivity_decomposition_check(U: Universe, family=Exhaustive(8)) -> SweepReport:
    """Compare injectivity against all monos with (f.p. monos) and (pure monos) injectivity."""
    monos = U.mono_representatives()
    pure = [m for m in monos if _is_pure(m, family)]
    rep = SweepReport("injectivity_decomposition",
                      notes={"universe": U.describe(), "monos": len(monos), "pure_monos": len(pure),
                             "purity_family_bound": family.bound})
    rows = []
    for K in U.objects:
        inj = all(is_injective_wrt(K, m) for m in monos)
        # every mono here has finitely presented cokernel
        fp = all(is_injective_wrt(K, m) for m in monos)
        pinj = all(is_injective_wrt(K, m) for m in pure)
        row = DecompositionRow(K, inj, fp, pinj)
        rows.append(row)
        rep.checked += 1
        if not row.agrees:
            rep.failures.append(row)
    rep.notes["rows"] = [(r.K.describe(), r.injective, r.fp_injective, r.pure_injective) for r in rows]
    return rep
