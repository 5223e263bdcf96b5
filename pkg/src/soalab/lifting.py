"""Injectivity, orthogonality and the lifting relation, plus brute-force oracles.

Quantifiers over "all u" or "all squares" are handled through group
structure: the extendable maps and the liftable squares each form a
subgroup, so it is enough to test a generating set.  The oracle functions
redo everything by listing hom-sets and exist to catch solver bugs.
"""
from __future__ import annotations

import itertools
from functools import lru_cache
from dataclasses import dataclass
from typing import Callable, Iterator, Optional

from .errors import NonCommutingSquare, NotMono
from .fpmod import (Equation, FpModule, FpMorphism, MapSolution, Term, automorphism_generators,
                    compose, equals, hom_enumerate, hom_generators, is_mono, iso_classes,
                    orbit_representatives, solve_maps)


@dataclass(frozen=True)
class ExtensionProblem:
    n: FpMorphism   # A -> B
    u: FpMorphism   # A -> K

    def __post_init__(self):
        if self.n.dom != self.u.dom:
            raise ValueError("n and u need a common domain")


@dataclass(frozen=True)
class LiftingSquare:
    """v∘p = i∘u; a diagonal w : cod p -> dom i has w∘p = u and i∘w = v."""
    p: FpMorphism
    i: FpMorphism
    u: FpMorphism
    v: FpMorphism

    def __post_init__(self):
        if not equals(compose(self.v, self.p), compose(self.i, self.u)):
            raise NonCommutingSquare("v∘p != i∘u")


@dataclass
class DiagonalSet:
    solution: MapSolution

    @property
    def empty(self) -> bool:
        return self.solution.empty

    def __bool__(self) -> bool:
        return not self.empty

    @property
    def particular(self) -> Optional[FpMorphism]:
        p = self.solution.particular()
        return None if p is None else p[0]

    @property
    def kernel(self) -> list[FpMorphism]:
        return [k[0] for k in self.solution.kernel()]

    def explicit(self, limit: Optional[int] = None) -> list[FpMorphism]:
        return [s[0] for s in self.solution.enumerate(limit)]

    def sample(self, rng) -> Optional[FpMorphism]:
        """A random member: the particular solution plus a random kernel combination."""
        w = self.particular
        if w is None:
            return None
        for k in self.kernel:
            w = w + k.scale(rng.randrange(k.cod.exponent or 16))
        return w

    def __len__(self) -> int:
        return self.solution.count()


def extensions(prob: ExtensionProblem) -> DiagonalSet:
    """All w : B -> K with w∘n = u."""
    n, u = prob.n, prob.u
    sol = solve_maps([(n.cod, u.cod)], [Equation(n.dom, u.cod, [Term(0, pre=n)], u)])
    return DiagonalSet(sol)


def is_injective_wrt(K: FpModule, n: FpMorphism) -> bool:
    """n ▽ K: every u : dom n -> K extends along n."""
    for u in hom_generators(n.dom, K):
        if not extensions(ExtensionProblem(n, u)):
            return False
    return True


def is_orthogonal_to(K: FpModule, n: FpMorphism) -> bool:
    """n ⊥ K: every u extends, and uniquely."""
    if not is_injective_wrt(K, n):
        return False
    zero = FpMorphism.from_cmat(n.dom, K, [[0] * K.ncoords for _ in range(n.dom.ncoords)])
    return not extensions(ExtensionProblem(n, zero)).kernel


def diagonals(sq: LiftingSquare) -> DiagonalSet:
    p, i = sq.p, sq.i
    sol = solve_maps([(p.cod, i.dom)], [
        Equation(p.dom, i.dom, [Term(0, pre=p)], sq.u),
        Equation(p.cod, i.cod, [Term(0, post=i)], sq.v),
    ])
    return DiagonalSet(sol)


def has_lifting(sq: LiftingSquare) -> Optional[FpMorphism]:
    """The canonical (least) diagonal, or None."""
    return diagonals(sq).particular


def has_unique_lifting(sq: LiftingSquare) -> Optional[FpMorphism]:
    d = diagonals(sq)
    if d.empty or d.kernel:
        return None
    return d.particular


def square_generators(p: FpMorphism, i: FpMorphism) -> list[tuple[FpMorphism, FpMorphism]]:
    """Generators (u, v) of the group of commutative squares v∘p = i∘u."""
    sol = solve_maps([(p.dom, i.dom), (p.cod, i.cod)], [
        Equation(p.dom, i.cod, [Term(0, post=i), Term(1, pre=p, coef=-1)])])
    return [(u, v) for u, v in sol.kernel()]


def random_square(p: FpMorphism, i: FpMorphism, rng) -> LiftingSquare:
    """A random commutative square from p to i: a random combination of square generators."""
    u = [[0] * i.dom.ncoords for _ in range(p.dom.ncoords)]
    v = [[0] * i.cod.ncoords for _ in range(p.cod.ncoords)]
    for gu, gv in square_generators(p, i):
        c = rng.randrange(p.dom.ring.n or 16)
        for acc, g in ((u, gu), (v, gv)):
            for col, gcol in zip(acc, g.cmat):
                col[:] = [a + c * b for a, b in zip(col, gcol)]
    red = lambda M, cols: [[x % o if o else x for x, o in zip(col, M.orders)] for col in cols]
    return LiftingSquare(p, i, FpMorphism.from_cmat(p.dom, i.dom, red(i.dom, u)),
                         FpMorphism.from_cmat(p.cod, i.cod, red(i.cod, v)))


def lifts(p: FpMorphism, i: FpMorphism) -> bool:
    """p □ i."""
    for u, v in square_generators(p, i):
        if has_lifting(LiftingSquare(p, i, u, v)) is None:
            return False
    return True


def lifts_uniquely(p: FpMorphism, i: FpMorphism) -> bool:
    """p ⊥ i (unique diagonals)."""
    if not lifts(p, i):
        return False
    zero_u = FpMorphism.from_cmat(p.dom, i.dom, [[0] * i.dom.ncoords for _ in range(p.dom.ncoords)])
    zero_v = FpMorphism.from_cmat(p.cod, i.cod, [[0] * i.cod.ncoords for _ in range(p.cod.ncoords)])
    return not diagonals(LiftingSquare(p, i, zero_u, zero_v)).kernel


# ---------------------------------------------------------------------------
# Purity
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _family_maps(ring, bound: int, up_to_iso: bool) -> tuple[FpMorphism, ...]:
    objs = iso_classes(ring, bound)
    auts = {id(M): automorphism_generators(M) for M in objs}
    pairs = sorted(itertools.product(objs, objs), key=lambda cd: (cd[0].order * cd[1].order, cd[0].order))
    out = []
    for C, D in pairs:
        maps = hom_enumerate(C, D)
        if up_to_iso:
            maps = orbit_representatives(maps, auts[id(D)], auts[id(C)])
        out.extend(maps)
    return tuple(out)


@dataclass(frozen=True)
class Exhaustive:
    """Every z : C -> D between modules of order <= bound.

    One module per iso class; with ``up_to_iso`` one z per orbit of
    Aut(D) x Aut(C), which changes nothing since the square condition is
    invariant under isomorphism of z.
    """
    bound: int
    up_to_iso: bool = True

    def morphisms(self, ring) -> Iterator[FpMorphism]:
        return iter(_family_maps(ring, self.bound, self.up_to_iso))


@dataclass(frozen=True)
class Explicit:
    maps: tuple[FpMorphism, ...]

    def morphisms(self, ring) -> Iterator[FpMorphism]:
        return iter(self.maps)


@dataclass
class PurityResult:
    pure: bool
    family: object
    checked: int
    witness: Optional[tuple[FpMorphism, FpMorphism, FpMorphism]] = None   # (z, s, t)

    def __bool__(self) -> bool:
        return self.pure


def upper_diagonal(z: FpMorphism, s: FpMorphism) -> Optional[FpMorphism]:
    """Some d with d∘z = s."""
    return extensions(ExtensionProblem(z, s)).particular


def pure_against(f: FpMorphism, z: FpMorphism) -> Optional[tuple[FpMorphism, FpMorphism]]:
    """A square (s, t) with t∘z = f∘s and no d: d∘z = s, or None if none exists."""
    sol = solve_maps([(z.dom, f.dom), (z.cod, f.cod)], [
        Equation(z.dom, f.cod, [Term(0, post=f), Term(1, pre=z, coef=-1)])])
    for s, t in sol.kernel():
        if upper_diagonal(z, s) is None:
            return s, t
    return None


def is_pure_mono(f: FpMorphism, family=Exhaustive(8)) -> PurityResult:
    """Every square from a family member z onto f has d with d∘z = s."""
    if not is_mono(f):
        raise NotMono("purity is tested on monomorphisms")
    checked = 0
    for z in family.morphisms(f.dom.ring):
        checked += 1
        bad = pure_against(f, z)
        if bad is not None:
            return PurityResult(False, family, checked, (z, bad[0], bad[1]))
    return PurityResult(True, family, checked)


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------

def brute_extensions(prob: ExtensionProblem) -> list[FpMorphism]:
    return [w for w in hom_enumerate(prob.n.cod, prob.u.cod) if equals(compose(w, prob.n), prob.u)]


def brute_diagonals(sq: LiftingSquare) -> list[FpMorphism]:
    return [w for w in hom_enumerate(sq.p.cod, sq.i.dom)
            if equals(compose(w, sq.p), sq.u) and equals(compose(sq.i, w), sq.v)]


@dataclass
class OracleReport:
    agree: bool
    kind: str
    solver_count: int
    oracle_count: int
    witness: Optional[FpMorphism] = None
    note: str = ""

    def __str__(self) -> str:
        return "agree" if self.agree else f"disagree ({self.note})"


def _check_listing(kind, solved: list[FpMorphism], brute: list[FpMorphism], valid) -> OracleReport:
    s_keys = {w.cmat for w in solved}
    b_keys = {w.cmat for w in brute}
    for w in solved:
        if not valid(w):
            return OracleReport(False, kind, len(s_keys), len(b_keys), w, "solver returned a non-solution")
    missing = [w for w in brute if w.cmat not in s_keys]
    if missing:
        return OracleReport(False, kind, len(s_keys), len(b_keys), missing[0], "solver missed a solution")
    if len(s_keys) != len(solved):
        return OracleReport(False, kind, len(s_keys), len(b_keys), None, "duplicate solutions")
    return OracleReport(True, kind, len(s_keys), len(b_keys))


def oracle_check(problem, solver: Optional[Callable] = None) -> OracleReport:
    """Compare the linear-algebra solver with full hom-set filtering.

    ``solver`` overrides the solver under test (used for negative controls);
    it must return the list of solutions.
    """
    if isinstance(problem, ExtensionProblem):
        solved = solver(problem) if solver else extensions(problem).explicit()
        brute = brute_extensions(problem)
        valid = lambda w: equals(compose(w, problem.n), problem.u)
        return _check_listing("extension", solved, brute, valid)
    if isinstance(problem, LiftingSquare):
        solved = solver(problem) if solver else diagonals(problem).explicit()
        brute = brute_diagonals(problem)
        valid = lambda w: equals(compose(w, problem.p), problem.u) and equals(compose(problem.i, w), problem.v)
        report = _check_listing("lifting", solved, brute, valid)
        if report.agree and solver is None:
            w = has_lifting(problem)
            if (w is None) != (not brute):
                return OracleReport(False, "lifting", len(solved), len(brute), w, "has_lifting disagrees")
        return report
    raise TypeError(f"unsupported problem type {type(problem).__name__}")


def brute_lifts(p: FpMorphism, i: FpMorphism) -> bool:
    for u in hom_enumerate(p.dom, i.dom):
        for v in hom_enumerate(p.cod, i.cod):
            if equals(compose(v, p), compose(i, u)) and not brute_diagonals(LiftingSquare(p, i, u, v)):
                return False
    return True


def brute_injective(K: FpModule, n: FpMorphism) -> bool:
    return all(brute_extensions(ExtensionProblem(n, u)) for u in hom_enumerate(n.dom, K))
