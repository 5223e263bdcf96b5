"""Finitely presented modules over Z or Z/N and the maps between them.

A module is a generator count plus a relation matrix whose *columns* are
relators.  Every module lazily computes a diagonal "structure": an
isomorphism with a direct sum of cyclic groups Z/o_1 ⊕ ... (o = 0 meaning a
free Z summand).  Elements and morphisms are compared in those coordinates,
which makes equality modulo relations exact and cheap.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import cached_property
from math import gcd, prod
from typing import Iterable, Optional, Sequence

from .errors import (CompositionError, IllDefinedMorphism, InfiniteHomSet,
                     NonCommutingSquare, NotMono, RingMismatch)
from .exactlin import (AffineSolutionSet, BigMatrix, block_diag, diagonalize_mod,
                       smith_normal_form, solve_bilinear_membership, solve_congruences)


@dataclass(frozen=True)
class Ring:
    kind: str
    n: Optional[int] = None

    def __post_init__(self):
        if self.kind == "Z":
            if self.n is not None:
                raise ValueError("ring Z takes no modulus")
        elif self.kind == "Zmod":
            if self.n is None or self.n < 2:
                raise ValueError("Zmod needs n >= 2")
        else:
            raise ValueError(f"unknown ring kind {self.kind!r}")

    @classmethod
    def Z(cls) -> "Ring":
        return cls("Z")

    @classmethod
    def Zmod(cls, n: int) -> "Ring":
        return cls("Zmod", n)

    @property
    def modulus(self) -> Optional[int]:
        return self.n

    def __str__(self) -> str:
        return "Z" if self.kind == "Z" else f"Z/{self.n}"


@dataclass(frozen=True)
class _Structure:
    all_orders: tuple[int, ...]      # one per generator; 1 = trivial, 0 = free
    U: BigMatrix                     # coordinates = U·x
    U_inv: BigMatrix
    idx: tuple[int, ...]             # generators with order != 1

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(self.all_orders[i] for i in self.idx)


def _prime_powers(n: int) -> list[tuple[int, int]]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            q = 1
            while n % p == 0:
                n //= p
                q *= p
            out.append((p, q))
        p += 1
    if n > 1:
        out.append((n, n))
    return out


def invariant_factors_from_orders(orders: Iterable[int]) -> list[int]:
    """Regroup cyclic orders (> 1) into the d_1 | d_2 | ... chain."""
    by_prime: dict[int, list[int]] = {}
    for o in orders:
        for p, q in _prime_powers(o):
            by_prime.setdefault(p, []).append(q)
    if not by_prime:
        return []
    length = max(len(v) for v in by_prime.values())
    out = [1] * length
    for powers in by_prime.values():
        powers.sort(reverse=True)
        for k, q in enumerate(powers):
            out[length - 1 - k] *= q
    return out


@dataclass(frozen=True)
class FpModule:
    ring: Ring
    generators: int
    relations: BigMatrix

    def __post_init__(self):
        if self.relations.rows != self.generators:
            raise ValueError(f"relation matrix must have {self.generators} rows")

    # -- constructors -------------------------------------------------
    @classmethod
    def from_columns(cls, ring: Ring, generators: int, columns: Sequence[Sequence[int]]) -> "FpModule":
        return cls(ring, generators, BigMatrix.from_columns(columns, generators))

    @classmethod
    def cyclic(cls, ring: Ring, order: int) -> "FpModule":
        return cls.from_columns(ring, 1, [[order]] if order else [])

    @classmethod
    def from_invariants(cls, ring: Ring, orders: Sequence[int]) -> "FpModule":
        k = len(orders)
        return cls(ring, k, BigMatrix.diagonal(list(orders), k, k) if k else BigMatrix.zeros(0, 0))

    # -- structure ----------------------------------------------------
    @cached_property
    def _structure(self) -> _Structure:
        g = self.generators
        if self.ring.kind == "Zmod":
            n = self.ring.n
            U, D, _, Ui = diagonalize_mod(self.relations, n, want_inverse=True)
            orders = tuple(gcd(D[i] if i < len(D) else 0, n) for i in range(g))
        else:
            dec = smith_normal_form(self.relations)
            diag = dec.diagonal
            U, Ui = dec.U, dec.U_inv
            orders = tuple(abs(diag[i]) if i < len(diag) else 0 for i in range(g))
        idx = tuple(i for i in range(g) if orders[i] != 1)
        return _Structure(orders, U, Ui, idx)

    @cached_property
    def orders(self) -> tuple[int, ...]:
        return self._structure.orders

    @cached_property
    def _coord_rows(self) -> list[list[int]]:
        s = self._structure
        return [s.U.row(i) for i in s.idx]

    @cached_property
    def _lift_cols(self) -> list[list[int]]:
        s = self._structure
        return [s.U_inv.col(i) for i in s.idx]

    @property
    def ncoords(self) -> int:
        return len(self.orders)

    def coords(self, x: Sequence[int]) -> tuple[int, ...]:
        """Canonical coordinates of the element with generator vector x."""
        out = []
        for row, o in zip(self._coord_rows, self.orders):
            v = sum(a * b for a, b in zip(row, x))
            out.append(v % o if o else v)
        return tuple(out)

    def lift(self, y: Sequence[int]) -> list[int]:
        """Generator vector of the element with coordinates y."""
        x = [0] * self.generators
        for c, col in zip(y, self._lift_cols):
            if c:
                for i, v in enumerate(col):
                    x[i] += c * v
        if self.ring.n:
            x = [v % self.ring.n for v in x]
        return x

    def is_zero_element(self, x: Sequence[int]) -> bool:
        return not any(self.coords(x))

    @property
    def is_finite(self) -> bool:
        return all(o > 0 for o in self.orders)

    @cached_property
    def order(self) -> Optional[int]:
        """Cardinality, or None when the module is infinite."""
        return prod(self.orders) if self.is_finite else None

    @cached_property
    def exponent(self) -> int:
        """Least e > 0 killing the module; 0 for infinite modules."""
        if not self.is_finite:
            return 0
        out = 1
        for o in self.orders:
            out = out * o // gcd(out, o)
        return out

    def elements(self) -> Iterable[tuple[int, ...]]:
        if not self.is_finite:
            raise InfiniteHomSet(f"module {self.describe()} is infinite", self)
        return itertools.product(*(range(o) for o in self.orders))

    def describe(self) -> str:
        free, inv = canonical_form(self)
        parts = [f"Z/{d}" for d in inv] + ["Z"] * free
        return " + ".join(parts) if parts else "0"

    def __repr__(self) -> str:
        return f"FpModule({self.ring}, {self.describe()}, gens={self.generators})"


def canonical_form(M: FpModule) -> tuple[int, list[int]]:
    """(free rank, invariant factors d_1 | d_2 | ...) of M."""
    free = sum(1 for o in M.orders if o == 0)
    return free, invariant_factors_from_orders(o for o in M.orders if o > 1)


def isomorphic(A: FpModule, B: FpModule) -> bool:
    return A.ring == B.ring and canonical_form(A) == canonical_form(B)


def zero_module(ring: Ring) -> FpModule:
    return FpModule(ring, 0, BigMatrix.zeros(0, 0))


def _check_ring(*modules: FpModule) -> Ring:
    rings = {m.ring for m in modules}
    if len(rings) != 1:
        raise RingMismatch(f"modules over different rings: {sorted(map(str, rings))}")
    return rings.pop()


# ---------------------------------------------------------------------------
# Morphisms
# ---------------------------------------------------------------------------

def _cmat_of(dom: FpModule, cod: FpModule, F: BigMatrix) -> tuple[tuple[int, ...], ...]:
    cols = []
    for lc in dom._lift_cols:
        cols.append(cod.coords(F.apply(lc)))
    return tuple(cols)


@dataclass(frozen=True, eq=False)
class FpMorphism:
    """A module map given by images of generators (matrix columns)."""

    dom: FpModule
    cod: FpModule
    matrix: BigMatrix
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        _check_ring(self.dom, self.cod)
        if (self.matrix.rows, self.matrix.cols) != (self.cod.generators, self.dom.generators):
            raise ValueError(
                f"matrix must be {self.cod.generators}x{self.dom.generators}, "
                f"got {self.matrix.rows}x{self.matrix.cols}")
        if self.check and not self._well_defined():
            raise IllDefinedMorphism("matrix does not respect the domain relations")

    def _well_defined(self) -> bool:
        s = self.dom._structure
        F = self.matrix
        for i, o in enumerate(s.all_orders):
            if o == 0:
                continue
            col = s.U_inv.col(i)
            img = F.apply([o * v for v in col])
            if any(self.cod.coords(img)):
                return False
        return True

    @cached_property
    def cmat(self) -> tuple[tuple[int, ...], ...]:
        """Images of the canonical generators of dom, in cod coordinates (column list)."""
        return _cmat_of(self.dom, self.cod, self.matrix)

    @cached_property
    def witness(self) -> AffineSolutionSet:
        """Y with R_cod·Y = F·R_dom, certifying well-definedness."""
        R_B = self.cod.relations
        if self.cod.ring.n:
            R_B = R_B.hstack(BigMatrix.identity(self.cod.generators).scale(self.cod.ring.n))
        return solve_bilinear_membership(self.matrix, self.dom.relations, R_B)

    @classmethod
    def from_cmat(cls, dom: FpModule, cod: FpModule, cmat: Sequence[Sequence[int]]) -> "FpMorphism":
        s = dom._structure
        cols = [[0] * cod.generators for _ in range(dom.generators)]
        lifted = [cod.lift(c) for c in cmat]
        for j, k in enumerate(s.idx):
            urow = s.U.row(k)
            lj = lifted[j]
            for i in range(dom.generators):
                u = urow[i]
                if u:
                    ci = cols[i]
                    for r in range(cod.generators):
                        ci[r] += u * lj[r]
        if cod.ring.n:
            cols = [[v % cod.ring.n for v in c] for c in cols]
        f = cls(dom, cod, BigMatrix.from_columns(cols, cod.generators), check=False)
        f.__dict__["cmat"] = tuple(tuple(c) for c in cmat)
        return f

    def __call__(self, x: Sequence[int]) -> list[int]:
        return self.matrix.apply(x)

    def image_coords(self, y: Sequence[int]) -> tuple[int, ...]:
        """Apply to an element given in dom coordinates; answer in cod coordinates."""
        out = [0] * self.cod.ncoords
        for c, col in zip(y, self.cmat):
            if c:
                for i, v in enumerate(col):
                    out[i] += c * v
        return tuple(v % o if o else v for v, o in zip(out, self.cod.orders))

    def __matmul__(self, other: "FpMorphism") -> "FpMorphism":
        return compose(self, other)

    def __add__(self, other: "FpMorphism") -> "FpMorphism":
        _same_ends(self, other)
        M = self.matrix + other.matrix
        if self.cod.ring.n:
            M = M.mod(self.cod.ring.n)
        return FpMorphism(self.dom, self.cod, M, check=False)

    def __neg__(self) -> "FpMorphism":
        M = -self.matrix
        if self.cod.ring.n:
            M = M.mod(self.cod.ring.n)
        return FpMorphism(self.dom, self.cod, M, check=False)

    def __sub__(self, other: "FpMorphism") -> "FpMorphism":
        return self + (-other)

    def scale(self, k: int) -> "FpMorphism":
        M = self.matrix.scale(k)
        if self.cod.ring.n:
            M = M.mod(self.cod.ring.n)
        return FpMorphism(self.dom, self.cod, M, check=False)

    def is_zero(self) -> bool:
        return not any(any(c) for c in self.cmat)

    def key(self) -> tuple:
        return self.cmat

    def __eq__(self, other) -> bool:
        if not isinstance(other, FpMorphism):
            return NotImplemented
        return self.dom == other.dom and self.cod == other.cod and self.cmat == other.cmat

    def __hash__(self) -> int:
        return hash((self.dom, self.cod, self.cmat))

    def __repr__(self) -> str:
        return f"FpMorphism({self.dom.describe()} -> {self.cod.describe()}, {self.matrix.tolist()})"


def _same_ends(f: FpMorphism, g: FpMorphism) -> None:
    if f.dom != g.dom or f.cod != g.cod:
        raise CompositionError("morphisms have different domain or codomain")


def morphism(dom: FpModule, cod: FpModule, rows: Sequence[Sequence[int]]) -> FpMorphism:
    return FpMorphism(dom, cod, BigMatrix.from_rows(rows, dom.generators))


def identity(M: FpModule) -> FpMorphism:
    return FpMorphism(M, M, BigMatrix.identity(M.generators), check=False)


def zero_morphism(A: FpModule, B: FpModule) -> FpMorphism:
    return FpMorphism(A, B, BigMatrix.zeros(B.generators, A.generators), check=False)


def compose(g: FpMorphism, f: FpMorphism) -> FpMorphism:
    """g∘f."""
    if f.cod != g.dom:
        raise CompositionError("cod(f) != dom(g)")
    M = g.matrix @ f.matrix
    if g.cod.ring.n:
        M = M.mod(g.cod.ring.n)
    h = FpMorphism(f.dom, g.cod, M, check=False)
    return h


def compose_all(*fs: FpMorphism) -> FpMorphism:
    """compose_all(h, g, f) = h∘g∘f."""
    out = fs[-1]
    for g in reversed(fs[:-1]):
        out = compose(g, out)
    return out


def equals(f: FpMorphism, g: FpMorphism) -> bool:
    _same_ends(f, g)
    return f.cmat == g.cmat


# ---------------------------------------------------------------------------
# Linear systems in unknown morphisms
# ---------------------------------------------------------------------------

@dataclass
class Term:
    unknown: int
    post: Optional[FpMorphism] = None     # applied after the unknown
    pre: Optional[FpMorphism] = None      # applied before the unknown
    coef: int = 1


@dataclass
class Equation:
    dom: FpModule
    cod: FpModule
    terms: list[Term]
    rhs: Optional[FpMorphism] = None      # None means zero


def _id_cmat(M: FpModule) -> list[list[int]]:
    n = M.ncoords
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _homogeneous(sol: AffineSolutionSet, n: int) -> list[tuple[int, ...]]:
    """Kernel generators over Z, including the modulus multiples the solver leaves implicit."""
    out = [tuple(v) for v in sol.kernel_basis]
    if sol.modulus:
        out += [tuple(sol.modulus if i == j else 0 for i in range(n)) for j in range(n)]
    return out


class MapSolution:
    """The solution set of a linear system whose unknowns are morphisms."""

    def __init__(self, unknowns, sol: AffineSolutionSet, offsets):
        self.unknowns = unknowns
        self.sol = sol
        self.offsets = offsets
        self.nvar = sum(X.ncoords * Y.ncoords for X, Y in unknowns)

    @property
    def empty(self) -> bool:
        return self.sol.particular is None

    def __bool__(self) -> bool:
        return not self.empty

    def _reduce(self, vec: Sequence[int]) -> tuple[int, ...]:
        out = list(vec)
        for (X, Y), off in zip(self.unknowns, self.offsets):
            nx = X.ncoords
            for a, o in enumerate(Y.orders):
                if o:
                    for b in range(nx):
                        k = off + a * nx + b
                        out[k] %= o
        return tuple(out)

    def _maps(self, vec: Sequence[int]) -> tuple[FpMorphism, ...]:
        out = []
        for (X, Y), off in zip(self.unknowns, self.offsets):
            nx, ny = X.ncoords, Y.ncoords
            cmat = [[vec[off + a * nx + b] for a in range(ny)] for b in range(nx)]
            cmat = [[v % o if o else v for v, o in zip(col, Y.orders)] for col in cmat]
            out.append(FpMorphism.from_cmat(X, Y, cmat))
        return tuple(out)

    def particular(self) -> Optional[tuple[FpMorphism, ...]]:
        if self.empty:
            return None
        return self._maps(self.sol.particular)

    def kernel(self) -> list[tuple[FpMorphism, ...]]:
        """Generators of the homogeneous solutions (zero maps dropped)."""
        out = []
        for v in _homogeneous(self.sol, self.nvar):
            r = self._reduce(v)
            if any(r):
                out.append(self._maps(r))
        return out

    def is_unique(self) -> bool:
        return not self.empty and not self.kernel()

    def vectors(self, limit: Optional[int] = None) -> list[tuple[int, ...]]:
        if self.empty:
            return []
        for (X, Y) in self.unknowns:
            if not Y.is_finite and X.ncoords:
                raise InfiniteHomSet(f"solutions in Hom({X.describe()}, {Y.describe()}) not enumerable", Y)
        start = self._reduce(self.sol.particular)
        gens = [self._reduce(v) for v in _homogeneous(self.sol, len(start))]
        gens = [g for g in gens if any(g)]
        seen = {start}
        frontier = [start]
        while frontier:
            nxt = []
            for v in frontier:
                for g in gens:
                    w = self._reduce([a + b for a, b in zip(v, g)])
                    if w not in seen:
                        seen.add(w)
                        nxt.append(w)
                        if limit is not None and len(seen) > limit:
                            raise InfiniteHomSet(f"more than {limit} solutions")
            frontier = nxt
        return sorted(seen)

    def enumerate(self, limit: Optional[int] = None) -> list[tuple[FpMorphism, ...]]:
        return [self._maps(v) for v in self.vectors(limit)]

    def count(self, limit: Optional[int] = None) -> int:
        return len(self.vectors(limit))


def solve_maps(unknowns: Sequence[tuple[FpModule, FpModule]], equations: Sequence[Equation]) -> MapSolution:
    """Solve Σ coef·post∘X_k∘pre = rhs for morphisms X_k : dom_k -> cod_k."""
    offsets = []
    nvar = 0
    for X, Y in unknowns:
        offsets.append(nvar)
        nvar += X.ncoords * Y.ncoords
    rows: list[list[int]] = []
    rhs: list[int] = []
    mods: list[int] = []
    for eq in equations:
        ncod, ndom = eq.cod.ncoords, eq.dom.ncoords
        R = eq.rhs.cmat if eq.rhs is not None else None
        block = [[[0] * nvar for _ in range(ndom)] for _ in range(ncod)]
        for t in eq.terms:
            X, Y = unknowns[t.unknown]
            off = offsets[t.unknown]
            nx = X.ncoords
            # L[i][a]: rows eq.cod coords, cols Y coords; P[b][j]: rows X coords, cols eq.dom coords
            if t.post is None:
                L = _id_cmat(Y)
            else:
                L = [[t.post.cmat[a][i] for a in range(Y.ncoords)] for i in range(ncod)]
            if t.pre is None:
                P = _id_cmat(X)
            else:
                P = [[t.pre.cmat[j][b] for j in range(ndom)] for b in range(nx)]
            for i in range(ncod):
                Li = L[i]
                for a, la in enumerate(Li):
                    if not la:
                        continue
                    for b in range(nx):
                        Pb = P[b]
                        k = off + a * nx + b
                        for j in range(ndom):
                            if Pb[j]:
                                block[i][j][k] += t.coef * la * Pb[j]
        for i in range(ncod):
            for j in range(ndom):
                rows.append(block[i][j])
                rhs.append(R[j][i] if R is not None else 0)
                mods.append(eq.cod.orders[i])
    for (X, Y), off in zip(unknowns, offsets):
        nx = X.ncoords
        for a, oy in enumerate(Y.orders):
            for b, ox in enumerate(X.orders):
                if ox == 0:
                    continue
                if oy and (ox % oy == 0):
                    continue
                row = [0] * nvar
                row[off + a * nx + b] = ox
                rows.append(row)
                rhs.append(0)
                mods.append(oy)
    if not rows:
        sol = AffineSolutionSet(tuple([0] * nvar), tuple(
            tuple(int(i == j) for j in range(nvar)) for i in range(nvar)), None)
    else:
        sol = solve_congruences(BigMatrix.from_rows(rows, nvar), rhs, mods)
    return MapSolution(list(unknowns), sol, offsets)


def hom_generators(A: FpModule, B: FpModule) -> list[FpMorphism]:
    """A generating set of the group Hom(A, B)."""
    sol = solve_maps([(A, B)], [])
    return [k[0] for k in sol.kernel()]


# ---------------------------------------------------------------------------
# Mono / epi / iso
# ---------------------------------------------------------------------------

def _kernel_vectors(f: FpMorphism) -> list[tuple[int, ...]]:
    """Generators (in dom coordinates) of ker f."""
    A, B = f.dom, f.cod
    n = A.ncoords
    if n == 0:
        return []
    rows = [[f.cmat[j][i] for j in range(n)] for i in range(B.ncoords)]
    mods = list(B.orders)
    if not rows:
        rows = [[0] * n]
        mods = [1]
    sol = solve_congruences(BigMatrix.from_rows(rows, n), [0] * len(rows), mods)
    out = []
    for v in _homogeneous(sol, n):
        red = tuple(x % o if o else x for x, o in zip(v, A.orders))
        if any(red):
            out.append(red)
    return out


def is_mono(f: FpMorphism) -> bool:
    return not _kernel_vectors(f)


def is_epi(f: FpMorphism) -> bool:
    return cokernel_projection(f).cod.ncoords == 0


def is_iso(f: FpMorphism) -> bool:
    return is_mono(f) and is_epi(f)


def inverse(f: FpMorphism) -> FpMorphism:
    sol = solve_maps([(f.cod, f.dom)], [
        Equation(f.dom, f.dom, [Term(0, pre=f)], identity(f.dom)),
        Equation(f.cod, f.cod, [Term(0, post=f)], identity(f.cod)),
    ])
    if sol.empty:
        raise ValueError("morphism is not invertible")
    return sol.particular()[0]


def is_split_mono(f: FpMorphism) -> Optional[FpMorphism]:
    """A retraction r with r∘f = id, or None."""
    sol = solve_maps([(f.cod, f.dom)], [Equation(f.dom, f.dom, [Term(0, pre=f)], identity(f.dom))])
    return None if sol.empty else sol.particular()[0]


def is_split_epi(f: FpMorphism) -> Optional[FpMorphism]:
    sol = solve_maps([(f.cod, f.dom)], [Equation(f.cod, f.cod, [Term(0, post=f)], identity(f.cod))])
    return None if sol.empty else sol.particular()[0]


# ---------------------------------------------------------------------------
# Kernels, cokernels, images
# ---------------------------------------------------------------------------

def _submodule(A: FpModule, coord_vectors: Sequence[Sequence[int]]) -> FpMorphism:
    """Inclusion of the submodule of A generated by elements given in coordinates."""
    gens = [A.lift(v) for v in coord_vectors]
    k = len(gens)
    n = A.ncoords
    if k == 0:
        return zero_morphism(zero_module(A.ring), A)
    rows = [[coord_vectors[j][i] for j in range(k)] for i in range(n)]
    mods = list(A.orders)
    if not rows:
        rows, mods = [[0] * k], [1]
    sol = solve_congruences(BigMatrix.from_rows(rows, k), [0] * len(rows), mods)
    rel_cols = [list(v) for v in sol.kernel_basis]
    if sol.modulus:
        rel_cols += [[sol.modulus if i == j else 0 for i in range(k)] for j in range(k)]
    K = FpModule.from_columns(A.ring, k, rel_cols)
    return FpMorphism(K, A, BigMatrix.from_columns(gens, A.generators), check=False)


def kernel_inclusion(f: FpMorphism) -> FpMorphism:
    return _submodule(f.dom, _kernel_vectors(f))


def cokernel_projection(f: FpMorphism) -> FpMorphism:
    B = f.cod
    C = FpModule(B.ring, B.generators, B.relations.hstack(f.matrix))
    return FpMorphism(B, C, BigMatrix.identity(B.generators), check=False)


def image_factorization(f: FpMorphism) -> tuple[FpMorphism, FpMorphism]:
    """(e, m) with e epi, m mono and m∘e = f; the image is A / ker f."""
    A = f.dom
    kv = [A.lift(v) for v in _kernel_vectors(f)]
    rel = A.relations.hstack(BigMatrix.from_columns(kv, A.generators)) if kv else A.relations
    Im = FpModule(A.ring, A.generators, rel)
    e = FpMorphism(A, Im, BigMatrix.identity(A.generators), check=False)
    m = FpMorphism(Im, f.cod, f.matrix, check=False)
    return e, m


def quotient_of_mono(f: FpMorphism) -> FpModule:
    if not is_mono(f):
        raise NotMono("quotient_of_mono needs a monomorphism")
    return cokernel_projection(f).cod


# ---------------------------------------------------------------------------
# Finite (co)limits
# ---------------------------------------------------------------------------

@dataclass
class Coproduct:
    apex: FpModule
    injections: list[FpMorphism]
    projections: list[FpMorphism]


def coproduct(*modules: FpModule) -> Coproduct:
    ring = _check_ring(*modules) if modules else None
    if not modules:
        raise ValueError("coproduct of nothing; use zero_module")
    S = FpModule(ring, sum(m.generators for m in modules), block_diag(*(m.relations for m in modules)))
    inj, proj = [], []
    off = 0
    for m in modules:
        I = [[int(i == j + off) for j in range(m.generators)] for i in range(S.generators)]
        inj.append(FpMorphism(m, S, BigMatrix.from_rows(I, m.generators), check=False))
        P = [[int(j == i + off) for j in range(S.generators)] for i in range(m.generators)]
        proj.append(FpMorphism(S, m, BigMatrix.from_rows(P, S.generators), check=False))
        off += m.generators
    return Coproduct(S, inj, proj)


def direct_sum(*maps: FpMorphism) -> FpMorphism:
    D = coproduct(*(f.dom for f in maps)).apex
    C = coproduct(*(f.cod for f in maps)).apex
    return FpMorphism(D, C, block_diag(*(f.matrix for f in maps)), check=False)


def copair(maps: Sequence[FpMorphism], src: Optional[FpModule] = None) -> FpMorphism:
    """[f_1, ..., f_k] : A_1 ⊕ ... ⊕ A_k -> T."""
    T = maps[0].cod
    S = src if src is not None else coproduct(*(f.dom for f in maps)).apex
    M = maps[0].matrix.hstack(*(f.matrix for f in maps[1:]))
    return FpMorphism(S, T, M)


def pair(maps: Sequence[FpMorphism], tgt: Optional[FpModule] = None) -> FpMorphism:
    """⟨f_1, ..., f_k⟩ : A -> B_1 ⊕ ... ⊕ B_k."""
    A = maps[0].dom
    T = tgt if tgt is not None else coproduct(*(f.cod for f in maps)).apex
    M = maps[0].matrix.vstack(*(f.matrix for f in maps[1:]))
    return FpMorphism(A, T, M)


@dataclass
class PushoutResult:
    apex: FpModule
    leg_left: FpMorphism       # B -> P
    leg_right: FpMorphism      # C -> P
    f: FpMorphism
    g: FpMorphism

    def mediator(self, x: FpMorphism, y: FpMorphism) -> FpMorphism:
        """Unique P -> T restricting to x on B and y on C."""
        if not equals(compose(x, self.f), compose(y, self.g)):
            raise NonCommutingSquare("cocone does not commute")
        return FpMorphism(self.apex, x.cod, x.matrix.hstack(y.matrix))


def pushout(f: FpMorphism, g: FpMorphism) -> PushoutResult:
    """Pushout of B <-f- A -g-> C, presented as (B ⊕ C)/⟨(f a, -g a)⟩."""
    if f.dom != g.dom:
        raise CompositionError("pushout needs a common domain")
    B, C = f.cod, g.cod
    ring = _check_ring(B, C)
    top = B.relations.hstack(BigMatrix.zeros(B.generators, C.relations.cols), f.matrix)
    bot = BigMatrix.zeros(C.generators, B.relations.cols).hstack(C.relations, -g.matrix)
    rel = top.vstack(bot)
    if ring.n:
        rel = rel.mod(ring.n)
    P = FpModule(ring, B.generators + C.generators, rel)
    nB, nC = B.generators, C.generators
    left = BigMatrix.from_rows([[int(i == j) for j in range(nB)] for i in range(nB + nC)], nB)
    right = BigMatrix.from_rows([[int(i == j + nB) for j in range(nC)] for i in range(nB + nC)], nC)
    return PushoutResult(P, FpMorphism(B, P, left, check=False), FpMorphism(C, P, right, check=False), f, g)


@dataclass
class PullbackResult:
    apex: FpModule
    proj_left: FpMorphism      # P -> B
    proj_right: FpMorphism     # P -> C
    f: FpMorphism
    g: FpMorphism
    inclusion: FpMorphism      # P -> B ⊕ C

    def mediator(self, x: FpMorphism, y: FpMorphism) -> FpMorphism:
        if not equals(compose(self.f, x), compose(self.g, y)):
            raise NonCommutingSquare("cone does not commute")
        target = pair([x, y], self.inclusion.cod)
        sol = solve_maps([(x.dom, self.apex)],
                         [Equation(x.dom, self.inclusion.cod, [Term(0, post=self.inclusion)], target)])
        return sol.particular()[0]


def pullback(f: FpMorphism, g: FpMorphism) -> PullbackResult:
    if f.cod != g.cod:
        raise CompositionError("pullback needs a common codomain")
    cp = coproduct(f.dom, g.dom)
    h = copair([f, -g], cp.apex)
    inc = kernel_inclusion(h)
    return PullbackResult(inc.dom, compose(cp.projections[0], inc), compose(cp.projections[1], inc), f, g, inc)


@dataclass
class ColimitResult:
    apex: FpModule
    legs: list[FpMorphism]
    objects: list[FpModule]
    arrows: list[tuple[int, int, FpMorphism]]

    def mediator(self, cocone: Sequence[FpMorphism]) -> FpMorphism:
        for s, t, a in self.arrows:
            if not equals(compose(cocone[t], a), cocone[s]):
                raise NonCommutingSquare("cocone does not commute")
        return FpMorphism(self.apex, cocone[0].cod, cocone[0].matrix.hstack(*(c.matrix for c in cocone[1:])))


def finite_colimit(objects: Sequence[FpModule], arrows: Sequence[tuple[int, int, FpMorphism]]) -> ColimitResult:
    """Colimit of a finite diagram: coproduct of the objects modulo x ~ a(x) per arrow."""
    objects = list(objects)
    ring = _check_ring(*objects)
    cp = coproduct(*objects)
    S = cp.apex
    offs = list(itertools.accumulate([0] + [o.generators for o in objects]))
    extra = []
    for s, t, a in arrows:
        if a.dom != objects[s] or a.cod != objects[t]:
            raise CompositionError("arrow does not match its endpoints")
        for j in range(a.dom.generators):
            col = [0] * S.generators
            col[offs[s] + j] += 1
            for i in range(a.cod.generators):
                col[offs[t] + i] -= a.matrix[i, j]
            extra.append(col)
    rel = S.relations.hstack(BigMatrix.from_columns(extra, S.generators)) if extra else S.relations
    if ring.n:
        rel = rel.mod(ring.n)
    P = FpModule(ring, S.generators, rel)
    legs = [FpMorphism(o, P, inj.matrix, check=False) for o, inj in zip(objects, cp.injections)]
    return ColimitResult(P, legs, objects, list(arrows))


def chain_colimit(fs: Sequence[FpMorphism]) -> ColimitResult:
    """Colimit of A_0 -> A_1 -> ... -> A_k."""
    if not fs:
        raise ValueError("empty chain")
    objects = [fs[0].dom] + [f.cod for f in fs]
    for f, g in zip(fs, fs[1:]):
        if f.cod != g.dom:
            raise CompositionError("chain is not composable")
    return finite_colimit(objects, [(i, i + 1, f) for i, f in enumerate(fs)])


def is_pushout_square(f: FpMorphism, g: FpMorphism, p: FpMorphism, q: FpMorphism) -> bool:
    """Is p∘f = q∘g a pushout square (f: A->B, g: A->C, p: B->T, q: C->T)?"""
    if not equals(compose(p, f), compose(q, g)):
        raise NonCommutingSquare("p∘f != q∘g")
    po = pushout(f, g)
    return is_iso(po.mediator(p, q))


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

def _require_finite(*modules: FpModule) -> None:
    for m in modules:
        if not m.is_finite:
            raise InfiniteHomSet(f"{m.describe()} is infinite", m)


def torsion_elements(B: FpModule, k: int) -> list[tuple[int, ...]]:
    """Elements b of B (coordinates) with k·b = 0."""
    _require_finite(B)
    if k == 0:
        return list(B.elements())
    choices = []
    for o in B.orders:
        step = o // gcd(o, k)
        choices.append(range(0, o, step))
    return list(itertools.product(*choices))


def hom_enumerate(A: FpModule, B: FpModule) -> list[FpMorphism]:
    """Every morphism A -> B, each exactly once."""
    _check_ring(A, B)
    _require_finite(A, B)
    per_gen = [torsion_elements(B, o) for o in A.orders]
    return [FpMorphism.from_cmat(A, B, cols) for cols in itertools.product(*per_gen)]


def hom_count(A: FpModule, B: FpModule) -> int:
    _require_finite(A, B)
    return prod(len(torsion_elements(B, o)) for o in A.orders)


def random_morphism(A: FpModule, B: FpModule, rng) -> FpMorphism:
    """A uniformly random morphism A -> B (both finite)."""
    _check_ring(A, B)
    _require_finite(A, B)
    cols = []
    for o in A.orders:
        opts = torsion_elements(B, o)
        cols.append(opts[rng.randrange(len(opts))])
    return FpMorphism.from_cmat(A, B, cols)


def random_automorphism(M: FpModule, rng) -> FpMorphism:
    """A random automorphism, found by rejection sampling (M finite)."""
    _require_finite(M)
    while True:
        cols = []
        for oj in M.orders:
            opts = torsion_elements(M, oj)
            cols.append(opts[rng.randrange(len(opts))])
        f = FpMorphism.from_cmat(M, M, cols)
        if is_iso(f):
            return f


def iso_classes(ring: Ring, max_order: int) -> list[FpModule]:
    """One diagonal representative per isomorphism class of finite modules of order <= max_order."""
    def chains(prev: int, budget: int):
        yield []
        d = max(prev, 2)
        while d <= budget:
            if ring.n is None or ring.n % d == 0:
                for rest in chains(d, budget // d):
                    yield [d] + rest
            d += prev
    found = set()
    for c in chains(1, max_order):
        found.add(tuple(c))
    reps = sorted(found, key=lambda c: (prod(c), len(c), c))
    return [FpModule.from_invariants(ring, list(c)) for c in reps]


def _add_coords(M: FpModule, x: Sequence[int], y: Sequence[int]) -> tuple[int, ...]:
    return tuple((a + b) % o for a, b, o in zip(x, y, M.orders))


def subgroups(B: FpModule) -> list[FpMorphism]:
    """Inclusion of every submodule of a finite module, smallest first.

    Over Z/N every subgroup is a submodule, so closing under addition is enough.
    """
    _require_finite(B)
    zero = tuple(0 for _ in B.orders)

    def span(gens):
        seen = {zero}
        frontier = [zero]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = _add_coords(B, x, g)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return frozenset(seen)

    elems = list(B.elements())
    cyclic = {}
    for e in elems:
        cyclic.setdefault(span([e]), e)
    found = {span([]): ()}
    for H, e in cyclic.items():
        found.setdefault(H, (e,))
    grew = True
    while grew:
        grew = False
        for H, gens in list(found.items()):
            for C, e in cyclic.items():
                if C <= H:
                    continue
                J = span(list(gens) + [e])
                if J not in found:
                    found[J] = tuple(gens) + (e,)
                    grew = True
    keyed = sorted(found.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))
    return [_submodule(B, [list(g) for g in gens]) for _, gens in keyed]


def automorphism_generators(M: FpModule, count: int = 3, seed: int = 0) -> list[FpMorphism]:
    """A few automorphisms of M (seeded); orbit computations stay exhaustive
    whatever subgroup these happen to generate."""
    _require_finite(M)
    if M.ncoords == 0:
        return []
    rng = random.Random(seed)
    out = []
    # coordinate swaps between equal orders and unit scalings are cheap extra generators
    for i in range(M.ncoords - 1):
        if M.orders[i] == M.orders[i + 1]:
            cols = [list(r) for r in _id_cmat(M)]
            cols[i], cols[i + 1] = cols[i + 1], cols[i]
            out.append(FpMorphism.from_cmat(M, M, cols))
    out.extend(random_automorphism(M, rng) for _ in range(count))
    uniq = {}
    for a in out:
        uniq.setdefault(a.cmat, a)
    return list(uniq.values())


def _apply_cmat(cmat, y, orders) -> tuple[int, ...]:
    out = [0] * len(orders)
    for c, col in zip(y, cmat):
        if c:
            for i, v in enumerate(col):
                out[i] += c * v
    return tuple(v % o for v, o in zip(out, orders))


def orbit_representatives(maps: Sequence[FpMorphism], left: Sequence[FpMorphism] = (),
                          right: Sequence[FpMorphism] = ()) -> list[FpMorphism]:
    """First member of each orbit of ``maps`` under f -> a∘f (a in left) and f -> f∘b (b in right).

    ``maps`` must share one domain and codomain, be closed under the action
    (e.g. a whole hom-set) and live between finite modules.
    """
    if not maps:
        return []
    A, B = maps[0].dom, maps[0].cod
    _require_finite(A, B)
    tables = [{y: _apply_cmat(a.cmat, y, B.orders) for y in B.elements()} for a in left]
    rcols = [b.cmat for b in right]
    index = {f.cmat: i for i, f in enumerate(maps)}
    parent = list(range(len(maps)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, f in enumerate(maps):
        cm = f.cmat
        images = [tuple(t[c] for c in cm) for t in tables]
        images += [tuple(_apply_cmat(cm, col, B.orders) for col in bc) for bc in rcols]
        for g in images:
            j = index[g]
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    return [f for i, f in enumerate(maps) if find(i) == i]


def normalize(M: FpModule) -> tuple[FpMorphism, FpMorphism]:
    """Isomorphisms M -> M' and M' -> M with M' diagonally presented (one generator per coordinate)."""
    N = FpModule.from_invariants(M.ring, [o for o in M.orders])
    if N.orders != M.orders:
        raise AssertionError("normalised module has different coordinates")
    cols = [M.coords([int(i == j) for i in range(M.generators)]) for j in range(M.generators)]
    fwd = FpMorphism(M, N, BigMatrix.from_columns([list(c) for c in cols], N.generators), check=False)
    back = FpMorphism(N, M, BigMatrix.from_columns([M.lift([int(i == j) for i in range(M.ncoords)])
                                                     for j in range(M.ncoords)], M.generators), check=False)
    return fwd, back


def subgroup_representatives(B: FpModule, auts: Sequence[FpMorphism]) -> list[FpMorphism]:
    """Subgroup inclusions into B, one per orbit under the group generated by ``auts``."""
    incs = subgroups(B)
    sets = []
    for m in incs:
        sets.append(frozenset(m.image_coords(y) for y in m.dom.elements()))
    index = {S: i for i, S in enumerate(sets)}
    tables = [{y: _apply_cmat(a.cmat, y, B.orders) for y in B.elements()} for a in auts]
    parent = list(range(len(incs)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, S in enumerate(sets):
        for t in tables:
            j = index[frozenset(t[y] for y in S)]
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    return [m for i, m in enumerate(incs) if find(i) == i]
