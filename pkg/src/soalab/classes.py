"""Polar class operators and closure-membership certificates over finite universes.

Classes that are proper-class sized are never materialised.  A
``MorphismClass`` is a set of generators plus closure flags, and membership
is a search for a certificate.  A failed search reports ``not_found`` unless
the negative is backed by a proof (e.g. a lifting obstruction), in which
case it reports ``not_member`` with the obstruction.
"""
from __future__ import annotations

import random

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Sequence

from .fpmod import (Equation, FpModule, FpMorphism, Ring, Term, automorphism_generators, canonical_form,
                    compose, equals, hom_enumerate, identity, image_factorization, is_iso, is_mono,
                    is_pushout_square, iso_classes, orbit_representatives, pushout, solve_maps,
                    subgroup_representatives, subgroups)
from .errors import InfiniteHomSet, NotMono
from .lifting import (ExtensionProblem, LiftingSquare, diagonals, extensions, is_injective_wrt,
                      is_orthogonal_to, lifts, lifts_uniquely)


# ---------------------------------------------------------------------------
# Universes
# ---------------------------------------------------------------------------

class Universe:
    """Finitely many finite modules, one per isomorphism class, and the maps between them."""

    def __init__(self, ring: Ring, objects: Iterable[FpModule], max_order: Optional[int] = None):
        seen = {}
        for M in objects:
            if M.ring != ring:
                raise ValueError("universe objects must share the ring")
            if not M.is_finite:
                raise InfiniteHomSet(f"universe object {M.describe()} is infinite", M)
            seen.setdefault(tuple(canonical_form(M)[1]), M)
        self.ring = ring
        self.max_order = max_order
        self.objects: tuple[FpModule, ...] = tuple(
            sorted(seen.values(), key=lambda M: (M.order, M.ncoords, M.orders)))

    @classmethod
    def of(cls, ring: Ring, max_order: int) -> "Universe":
        return cls(ring, iso_classes(ring, max_order), max_order)

    def describe(self) -> dict:
        if self.max_order is not None:
            return {"ring": str(self.ring), "max_order": self.max_order}
        return {"ring": str(self.ring), "objects": [M.describe() for M in self.objects]}

    def __repr__(self) -> str:
        return f"Universe({self.describe()})"

    def find(self, M: FpModule) -> Optional[FpModule]:
        key = tuple(canonical_form(M)[1])
        for N in self.objects:
            if tuple(canonical_form(N)[1]) == key:
                return N
        return None

    def hom(self, A: FpModule, B: FpModule) -> list[FpMorphism]:
        return self._hom_cache(A, B)

    def _hom_cache(self, A, B):
        key = (id(A), id(B))
        cache = self.__dict__.setdefault("_homs", {})
        if key not in cache:
            cache[key] = hom_enumerate(A, B)
        return cache[key]

    def automorphisms(self, M: FpModule) -> list[FpMorphism]:
        """Small seeded set of automorphisms (not necessarily generating)."""
        cache = self.__dict__.setdefault("_auts", {})
        if id(M) not in cache:
            cache[id(M)] = automorphism_generators(M)
        return cache[id(M)]

    @cached_property
    def morphisms(self) -> list[FpMorphism]:
        return [f for A in self.objects for B in self.objects for f in self.hom(A, B)]

    @cached_property
    def arrow_representatives(self) -> list[FpMorphism]:
        """One morphism per orbit of Aut(cod) x Aut(dom) on each hom-set.

        Classes closed under isomorphism of arrows are decided by these alone.
        """
        out = []
        for A in self.objects:
            for B in self.objects:
                out.extend(orbit_representatives(self.hom(A, B), self.automorphisms(B), self.automorphisms(A)))
        return out

    def monos(self) -> list[FpMorphism]:
        """Every mono into a universe object up to isomorphism over the codomain: subgroup inclusions."""
        return [m for B in self.objects for m in subgroups(B)]

    def mono_representatives(self) -> list[FpMorphism]:
        """Subgroup inclusions up to automorphisms of the codomain."""
        return [m for B in self.objects for m in subgroup_representatives(B, self.automorphisms(B))]


# ---------------------------------------------------------------------------
# Class descriptors and membership results
# ---------------------------------------------------------------------------

_FLAGS = ("po", "ch", "re", "fc")


@dataclass(frozen=True)
class MorphismClass:
    generators: tuple[FpMorphism, ...]
    closure: tuple[str, ...] = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "closure", tuple(self.closure))
        for c in self.closure:
            if c.split(":")[0] not in _FLAGS:
                raise ValueError(f"unknown closure flag {c!r}")

    @property
    def chain_bound(self) -> int:
        for c in self.closure:
            if c.startswith("ch"):
                return int(c.split(":")[1]) if ":" in c else 4
        return 1

    def has(self, flag: str) -> bool:
        return any(c.split(":")[0] == flag for c in self.closure)

    def __len__(self) -> int:
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)


@dataclass
class Membership:
    status: str                       # "member" | "not_member" | "not_found"
    certificate: object = None
    bound: object = None
    note: str = ""

    def __bool__(self) -> bool:
        return self.status == "member"


@dataclass
class ObjectClass:
    members: list[FpModule]
    relation: str
    universe: Optional[Universe] = None

    def __contains__(self, M: FpModule) -> bool:
        key = canonical_form(M)
        return any(canonical_form(K) == key for K in self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


# ---------------------------------------------------------------------------
# Polar operators
# ---------------------------------------------------------------------------

def _gens(N) -> Sequence[FpMorphism]:
    return N.generators if isinstance(N, MorphismClass) else list(N)


def triangle_objects(N, U: Universe) -> ObjectClass:
    """Objects of U injective with respect to every generator of N."""
    gens = _gens(N)
    members = [K for K in U.objects if all(is_injective_wrt(K, n) for n in gens)]
    return ObjectClass(members, "injective", U)


def perp_objects(N, U: Universe) -> ObjectClass:
    gens = _gens(N)
    members = [K for K in U.objects if all(is_orthogonal_to(K, n) for n in gens)]
    return ObjectClass(members, "orthogonal", U)


def triangle_morphisms(K: Iterable[FpModule], candidates: Iterable[FpMorphism]) -> list[FpMorphism]:
    K = list(K)
    return [n for n in candidates if all(is_injective_wrt(k, n) for k in K)]


def top_morphisms(K: Iterable[FpModule], candidates: Iterable[FpMorphism]) -> list[FpMorphism]:
    K = list(K)
    return [n for n in candidates if all(is_orthogonal_to(k, n) for k in K)]


def box_right(N, candidates: Iterable[FpMorphism]) -> list[FpMorphism]:
    """Candidates i with p □ i for every p in N."""
    gens = _gens(N)
    return [i for i in candidates if all(lifts(p, i) for p in gens)]


def box_left(candidates: Iterable[FpMorphism], N) -> list[FpMorphism]:
    gens = _gens(N)
    return [p for p in candidates if all(lifts(p, i) for i in gens)]


def downarrow(N, candidates: Iterable[FpMorphism]) -> list[FpMorphism]:
    """Candidates i with unique diagonals against every p in N."""
    gens = _gens(N)
    return [i for i in candidates if all(lifts_uniquely(p, i) for p in gens)]


def uparrow(candidates: Iterable[FpMorphism], N) -> list[FpMorphism]:
    gens = _gens(N)
    return [p for p in candidates if all(lifts_uniquely(p, i) for i in gens)]


# ---------------------------------------------------------------------------
# Closure certificates
# ---------------------------------------------------------------------------

@dataclass
class PoCertificate:
    """f is the pushout of ``generator`` along ``attach``; ``other`` closes the square."""
    generator: FpMorphism
    attach: FpMorphism
    other: FpMorphism
    f: FpMorphism

    def verify(self) -> bool:
        return is_pushout_square(self.generator, self.attach, self.other, self.f)


def _identity_certificate(f: FpMorphism, M: Sequence[FpMorphism]) -> Optional[PoCertificate]:
    for m in M:
        if m.dom == f.dom and m.cod == f.cod and equals(m, f):
            return PoCertificate(m, identity(m.dom), identity(m.cod), f)
    return None


def po_closure_membership(f: FpMorphism, M, U: Optional[Universe] = None) -> Membership:
    """Search for m in M, s: dom m -> dom f and t with f the pushout of m along s."""
    gens = _gens(M)
    cert = _identity_certificate(f, gens)
    if cert:
        return Membership("member", cert)
    for m in gens:
        for s in hom_enumerate(m.dom, f.dom):
            ts = extensions(ExtensionProblem(m, compose(f, s)))
            for t in ts.explicit(limit=4096):
                if is_pushout_square(m, s, t, f):
                    return Membership("member", PoCertificate(m, s, t, f))
    return Membership("not_found", bound="all attaching maps")


@dataclass
class ChainCertificate:
    steps: list[PoCertificate]
    iso: Optional[FpMorphism]           # end of chain -> cod f
    f: FpMorphism

    def verify(self) -> bool:
        if not all(s.verify() for s in self.steps):
            return False
        comp = identity(self.f.dom)
        for s in self.steps:
            if s.f.dom != comp.cod:
                return False
            comp = compose(s.f, comp)
        return is_iso(self.iso) and equals(compose(self.iso, comp), self.f)


def _comma_iso(h: FpMorphism, f: FpMorphism) -> Optional[FpMorphism]:
    """An isomorphism phi: cod h -> cod f with phi∘h = f, if one exists."""
    if h.cod.order != f.cod.order:
        return None
    sols = extensions(ExtensionProblem(h, f))
    # isos are usually plentiful among the extensions; try a few seeded samples before enumerating
    rng = random.Random(0)
    for _ in range(64):
        phi = sols.sample(rng)
        if phi is None:
            return None
        if is_iso(phi):
            return phi
    for phi in sols.explicit(limit=1 << 16):
        if is_iso(phi):
            return phi
    return None


def ch_membership(f: FpMorphism, M, U: Optional[Universe] = None, k: int = 3) -> Membership:
    """Search for a chain of at most k pushouts of generators composing to f (up to iso under dom f)."""
    gens = _gens(M)
    if is_iso(f):
        return Membership("member", ChainCertificate([], f, f))
    all_mono = all(is_mono(m) for m in gens)
    frontier = [(identity(f.dom), [])]
    for depth in range(k):
        nxt = []
        for comp, steps in frontier:
            X = comp.cod
            for m in gens:
                for s in hom_enumerate(m.dom, X):
                    po = pushout(m, s)
                    step = po.leg_right
                    new = compose(step, comp)
                    if all_mono and new.cod.order > f.cod.order:
                        continue
                    if extensions(ExtensionProblem(new, f)).empty:
                        continue
                    cert = PoCertificate(m, s, po.leg_left, step)
                    phi = _comma_iso(new, f)
                    if phi is not None:
                        return Membership("member", ChainCertificate(steps + [cert], phi, f), bound=k)
                    nxt.append((new, steps + [cert]))
        frontier = nxt
        if not frontier:
            break
    return Membership("not_found", bound=k)


@dataclass
class RetractCertificate:
    """f is a retract of n in (A ↓ C): s∘f = n, r∘n = f, r∘s = id."""
    f: FpMorphism
    n: FpMorphism
    s: FpMorphism
    r: FpMorphism

    def verify(self) -> bool:
        return (equals(compose(self.s, self.f), self.n) and equals(compose(self.r, self.n), self.f)
                and equals(compose(self.r, self.s), identity(self.f.cod)))


def retract_witness(f: FpMorphism, n: FpMorphism) -> Optional[RetractCertificate]:
    if f.dom != n.dom:
        return None
    for s in extensions(ExtensionProblem(f, n)).explicit(limit=1 << 14):
        rs = _retractions(f, n, s)
        if rs is not None:
            return RetractCertificate(f, n, s, rs)
    return None


def _retractions(f: FpMorphism, n: FpMorphism, s: FpMorphism) -> Optional[FpMorphism]:
    sol = solve_maps([(n.cod, f.cod)], [
        Equation(n.dom, f.cod, [Term(0, pre=n)], f),
        Equation(f.cod, f.cod, [Term(0, pre=s)], identity(f.cod)),
    ])
    p = sol.particular()
    return None if p is None else p[0]


def re_membership(f: FpMorphism, N: Iterable[FpMorphism], U: Optional[Universe] = None) -> Membership:
    """Is f a retract (under its domain) of one of the given morphisms?"""
    for n in N:
        w = retract_witness(f, n)
        if w is not None:
            return Membership("member", w)
    return Membership("not_found", bound="given candidates")


@dataclass
class CofCertificate:
    """f is a retract of f_star, and f_star carries a chain of verified pushouts."""
    trace: object
    section: FpMorphism               # d with d∘f = f_star, f_lambda∘d = id

    def verify(self) -> bool:
        t = self.trace
        return (equals(compose(self.section, t.f), t.f_star)
                and equals(compose(t.f_lambda, self.section), identity(t.f.cod))
                and t.verify())


def cof_membership(f: FpMorphism, M, U: Optional[Universe] = None, max_stage: int = 8) -> Membership:
    """Decide f ∈ Cof(M) through a strict factorization f = f_lambda∘f_star.

    f is a member iff the square f_star∘... (f, 1) against f_lambda has a
    diagonal: then f is a retract of the chain f_star.  When f_lambda is
    certified in M^□ and no diagonal exists, f fails to lift against a member
    of M^□, which rules it out of Cof(M) for good.
    """
    from .soa import EngineConfig, run_factorization
    gens = _gens(M)
    trace = run_factorization(f, EngineConfig(generators=MorphismClass(tuple(gens)), max_stage=max_stage))
    sq = LiftingSquare(f, trace.f_lambda, trace.f_star, identity(f.cod))
    d = diagonals(sq).particular
    if d is not None:
        return Membership("member", CofCertificate(trace, d))
    if trace.reason in ("iso", "box_certified"):
        return Membership("not_member", sq, note="no diagonal against f_lambda, which lies in M^□")
    return Membership("not_found", bound=max_stage)


def fc_membership(f: FpMorphism, M, U: Optional[Universe] = None, max_stage: int = 8) -> Membership:
    """Membership in the left class generated for unique liftings: the one-step factor must be an iso."""
    from .soa import orthogonal_factorize
    h, g, info = orthogonal_factorize(f, _gens(M), max_stage=max_stage)
    if is_iso(g):
        return Membership("member", (h, g))
    if info.get("stable"):
        return Membership("not_member", (h, g), note="residual factor is in the right class and not an iso")
    return Membership("not_found", bound=max_stage)


def class_membership(f: FpMorphism, C: MorphismClass, U: Optional[Universe] = None) -> Membership:
    """Dispatch on the closure flags of C."""
    if C.has("fc"):
        return fc_membership(f, C, U)
    if C.has("re"):
        return cof_membership(f, C, U)
    if C.has("ch"):
        return ch_membership(f, C, U, C.chain_bound)
    if C.has("po"):
        return po_closure_membership(f, C, U)
    for m in C.generators:
        if m.dom == f.dom and m.cod == f.cod and equals(m, f):
            return Membership("member", m)
    return Membership("not_member", note="not a listed generator")


# ---------------------------------------------------------------------------
# Injectivity tests
# ---------------------------------------------------------------------------

def fp_injectivity_test(K: FpModule, U: Universe) -> bool:
    """K injective w.r.t. every mono between objects of U (monos taken up to isomorphism)."""
    return all(is_injective_wrt(K, m) for m in U.monos())


@dataclass
class SandwichWitness:
    """f is the pushout of the mono m (domain a quotient of dom of the presenting map) along d."""
    m: FpMorphism
    d: FpMorphism
    e: FpMorphism
    presenting: tuple[FpMorphism, FpMorphism, FpMorphism]   # (g, u, v)
    f: FpMorphism

    def verify(self) -> bool:
        return (is_mono(self.m) and equals(compose(self.d, self.e), self.presenting[1])
                and is_pushout_square(self.m, self.d, self.presenting[2], self.f))


def lambda_g_sandwich_witness(f: FpMorphism) -> SandwichWitness:
    """Exhibit a mono f as a pushout of a mono out of a quotient of a presentable object.

    The presenting square is g = f, u = id, v = id (every finite module is
    presentable).  g is factored as epi e then mono m, and d is the unique map
    with d∘e = u and f∘d = v∘m.
    """
    if not is_mono(f):
        raise NotMono("the sandwich witness needs a monomorphism")
    g, u, v = f, identity(f.dom), identity(f.cod)
    e, m = image_factorization(g)
    d = extensions(ExtensionProblem(e, u)).particular
    return SandwichWitness(m, d, e, (g, u, v), f)
