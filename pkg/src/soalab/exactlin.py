"""Exact integer linear algebra.

Everything here works on Python ints, so there is no overflow anywhere.
The two workhorses are :func:`smith_normal_form` (over Z) and
:func:`solve_linear` (over Z or Z/m).  Solving modulo m runs a modular
diagonalisation, which keeps entries below m instead of letting them grow.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Iterable, Optional, Sequence


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with x*a + y*b == g == gcd(a, b) >= 0."""
    x, next_x = 1, 0
    y, next_y = 0, 1
    g, next_g = a, b
    while next_g:
        q = g // next_g
        x, next_x = next_x, x - q * next_x
        y, next_y = next_y, y - q * next_y
        g, next_g = next_g, g - q * next_g
    if g < 0:
        x, y, g = -x, -y, -g
    return g, x, y


def lcm(*values: int) -> int:
    out = 1
    for v in values:
        out = out * v // gcd(out, v)
    return out


@dataclass(frozen=True)
class BigMatrix:
    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"{self.rows}x{self.cols} matrix needs {self.rows * self.cols} entries, "
                f"got {len(self.entries)}")

    # -- constructors -------------------------------------------------
    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: Optional[int] = None) -> "BigMatrix":
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != cols:
                raise ValueError("ragged matrix")
        return cls(len(rows), cols, tuple(int(v) for r in rows for v in r))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], nrows: int) -> "BigMatrix":
        columns = [list(c) for c in columns]
        for c in columns:
            if len(c) != nrows:
                raise ValueError("column length mismatch")
        return cls.from_rows([[c[i] for c in columns] for i in range(nrows)], len(columns))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BigMatrix":
        return cls(rows, cols, (0,) * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> "BigMatrix":
        return cls(n, n, tuple(int(i == j) for i in range(n) for j in range(n)))

    @classmethod
    def diagonal(cls, values: Sequence[int], rows: Optional[int] = None,
                 cols: Optional[int] = None) -> "BigMatrix":
        rows = len(values) if rows is None else rows
        cols = len(values) if cols is None else cols
        m = [[0] * cols for _ in range(rows)]
        for i, v in enumerate(values):
            m[i][i] = v
        return cls.from_rows(m, cols)

    # -- access -------------------------------------------------------
    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> list[int]:
        return list(self.entries[i * self.cols:(i + 1) * self.cols])

    def col(self, j: int) -> list[int]:
        return [self.entries[i * self.cols + j] for i in range(self.rows)]

    def tolist(self) -> list[list[int]]:
        return [self.row(i) for i in range(self.rows)]

    def columns(self) -> list[list[int]]:
        return [self.col(j) for j in range(self.cols)]

    @property
    def T(self) -> "BigMatrix":
        return BigMatrix.from_rows(self.columns(), self.rows)

    def is_zero(self) -> bool:
        return not any(self.entries)

    # -- arithmetic ---------------------------------------------------
    def __matmul__(self, other: "BigMatrix") -> "BigMatrix":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        a = self.tolist()
        bt = other.columns()
        return BigMatrix.from_rows(
            [[sum(x * y for x, y in zip(r, c)) for c in bt] for r in a], other.cols)

    def apply(self, v: Sequence[int]) -> list[int]:
        if len(v) != self.cols:
            raise ValueError("vector length mismatch")
        return [sum(x * y for x, y in zip(self.row(i), v)) for i in range(self.rows)]

    def _zip(self, other: "BigMatrix", op) -> "BigMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        return BigMatrix(self.rows, self.cols, tuple(op(x, y) for x, y in zip(self.entries, other.entries)))

    def __add__(self, other: "BigMatrix") -> "BigMatrix":
        return self._zip(other, lambda x, y: x + y)

    def __sub__(self, other: "BigMatrix") -> "BigMatrix":
        return self._zip(other, lambda x, y: x - y)

    def __neg__(self) -> "BigMatrix":
        return BigMatrix(self.rows, self.cols, tuple(-x for x in self.entries))

    def scale(self, k: int) -> "BigMatrix":
        return BigMatrix(self.rows, self.cols, tuple(k * x for x in self.entries))

    def mod(self, m: int) -> "BigMatrix":
        return BigMatrix(self.rows, self.cols, tuple(x % m for x in self.entries))

    def hstack(self, *others: "BigMatrix") -> "BigMatrix":
        out = [self.row(i) for i in range(self.rows)]
        cols = self.cols
        for o in others:
            if o.rows != self.rows:
                raise ValueError("hstack row mismatch")
            for i in range(self.rows):
                out[i].extend(o.row(i))
            cols += o.cols
        return BigMatrix.from_rows(out, cols)

    def vstack(self, *others: "BigMatrix") -> "BigMatrix":
        entries = list(self.entries)
        rows = self.rows
        for o in others:
            if o.cols != self.cols:
                raise ValueError("vstack column mismatch")
            entries.extend(o.entries)
            rows += o.rows
        return BigMatrix(rows, self.cols, tuple(entries))

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "BigMatrix":
        return BigMatrix.from_rows([[self[i, j] for j in cols] for i in rows], len(cols))

    def __repr__(self) -> str:
        return f"BigMatrix({self.tolist()!r})"


def block_diag(*blocks: BigMatrix) -> BigMatrix:
    rows = sum(b.rows for b in blocks)
    cols = sum(b.cols for b in blocks)
    out = [[0] * cols for _ in range(rows)]
    r0 = c0 = 0
    for b in blocks:
        for i in range(b.rows):
            for j in range(b.cols):
                out[r0 + i][c0 + j] = b[i, j]
        r0 += b.rows
        c0 += b.cols
    return BigMatrix.from_rows(out, cols)


def _ident(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


# ---------------------------------------------------------------------------
# Smith normal form over Z
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SmithDecomposition:
    U: BigMatrix
    S: BigMatrix
    V: BigMatrix
    U_inv: BigMatrix
    V_inv: BigMatrix

    @property
    def diagonal(self) -> list[int]:
        return [self.S[i, i] for i in range(min(self.S.rows, self.S.cols))]


def _smith(a: list[list[int]], m: int, n: int):
    """In-place Smith reduction; returns U, U_inv, V, V_inv as lists."""
    U, Ui, V, Vi = _ident(m), _ident(m), _ident(n), _ident(n)

    def row_sub(i, t, q):      # row_i -= q * row_t
        if not q:
            return
        ai, at = a[i], a[t]
        for k in range(n):
            ai[k] -= q * at[k]
        ui, ut = U[i], U[t]
        for k in range(m):
            ui[k] -= q * ut[k]
        for r in Ui:
            r[t] += q * r[i]

    def col_sub(j, t, q):      # col_j -= q * col_t
        if not q:
            return
        for r in a:
            r[j] -= q * r[t]
        for r in V:
            r[j] -= q * r[t]
        vt, vj = Vi[t], Vi[j]
        for k in range(n):
            vt[k] += q * vj[k]

    def swap_rows(i, t):
        if i == t:
            return
        a[i], a[t] = a[t], a[i]
        U[i], U[t] = U[t], U[i]
        for r in Ui:
            r[i], r[t] = r[t], r[i]

    def swap_cols(j, t):
        if j == t:
            return
        for r in a:
            r[j], r[t] = r[t], r[j]
        for r in V:
            r[j], r[t] = r[t], r[j]
        Vi[j], Vi[t] = Vi[t], Vi[j]

    for t in range(min(m, n)):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                v = a[i][j]
                if v and (best is None or abs(v) < abs(a[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(best[0], t)
        swap_cols(best[1], t)
        while True:
            p = a[t][t]
            for i in range(t + 1, m):
                row_sub(i, t, a[i][t] // p)
            for j in range(t + 1, n):
                col_sub(j, t, a[t][j] // p)
            rest_r = [i for i in range(t + 1, m) if a[i][t]]
            rest_c = [j for j in range(t + 1, n) if a[t][j]]
            if rest_r or rest_c:
                # a remainder is smaller than the pivot; move it in
                if rest_r:
                    i = min(rest_r, key=lambda i: abs(a[i][t]))
                    swap_rows(i, t)
                else:
                    j = min(rest_c, key=lambda j: abs(a[t][j]))
                    swap_cols(j, t)
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                        if a[i][j] % p), None)
            if bad is None:
                break
            # row_t += row_i brings a non-multiple into the pivot row
            i = bad[0]
            row_sub(t, i, -1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            U[t] = [-x for x in U[t]]
            for r in Ui:
                r[t] = -r[t]
    return U, Ui, V, Vi


def smith_normal_form(A: BigMatrix) -> SmithDecomposition:
    """U·A·V = S with S diagonal, d_i >= 0 and d_i | d_{i+1}."""
    a = A.tolist()
    U, Ui, V, Vi = _smith(a, A.rows, A.cols)
    return SmithDecomposition(
        BigMatrix.from_rows(U, A.rows), BigMatrix.from_rows(a, A.cols),
        BigMatrix.from_rows(V, A.cols), BigMatrix.from_rows(Ui, A.rows),
        BigMatrix.from_rows(Vi, A.cols))


def invariant_factors(A: BigMatrix) -> list[int]:
    return [d for d in smith_normal_form(A).diagonal if d]


# ---------------------------------------------------------------------------
# Modular diagonalisation
# ---------------------------------------------------------------------------

def diagonalize_mod(A: BigMatrix, m: int, want_inverse: bool = False):
    """Return (U, D, V, U_inv) with U·A·V ≡ D (mod m), D diagonal.

    U and V are invertible modulo m; D is *not* put into Smith form.
    U_inv is None unless requested.
    """
    rows, cols = A.rows, A.cols
    a = [[x % m for x in A.row(i)] for i in range(rows)]
    U = _ident(rows)
    V = _ident(cols)
    Ui = _ident(rows) if want_inverse else None

    def comb_rows(t, i, x, y, z, w):
        # (row_t, row_i) <- (x row_t + y row_i, z row_t + w row_i), det = 1
        for mat in (a, U):
            rt, ri = mat[t], mat[i]
            mat[t] = [(x * p + y * q) % m for p, q in zip(rt, ri)]
            mat[i] = [(z * p + w * q) % m for p, q in zip(rt, ri)]
        if Ui is not None:
            # inverse is [[w, -y], [-z, x]] acting on columns
            for r in Ui:
                p, q = r[t], r[i]
                r[t] = (w * p - z * q) % m
                r[i] = (-y * p + x * q) % m

    def comb_cols(t, j, x, y, z, w):
        for mat in (a, V):
            for r in mat:
                p, q = r[t], r[j]
                r[t] = (x * p + y * q) % m
                r[j] = (z * p + w * q) % m

    def pick_transform(p, q):
        if p and q % p == 0:
            return 1, 0, -(q // p), 1
        g, x, y = xgcd(p, q)
        return x, y, -(q // g), p // g

    for t in range(min(rows, cols)):
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                v = a[i][j]
                if v and (best is None or gcd(v, m) < best[0]):
                    best = (gcd(v, m), i, j)
        if best is None:
            break
        _, bi, bj = best
        if bi != t:
            for mat in (a, U):
                mat[t], mat[bi] = mat[bi], mat[t]
            if Ui is not None:
                for r in Ui:
                    r[t], r[bi] = r[bi], r[t]
        if bj != t:
            for mat in (a, V):
                for r in mat:
                    r[t], r[bj] = r[bj], r[t]
        while True:
            dirty = False
            for i in range(t + 1, rows):
                if a[i][t]:
                    x, y, z, w = pick_transform(a[t][t], a[i][t])
                    comb_rows(t, i, x, y, z, w)
            for j in range(t + 1, cols):
                if a[t][j]:
                    x, y, z, w = pick_transform(a[t][t], a[t][j])
                    comb_cols(t, j, x, y, z, w)
            if any(a[i][t] for i in range(t + 1, rows)):
                dirty = True
            if not dirty:
                break
    D = [a[i][i] if i < cols else 0 for i in range(min(rows, cols))]
    return (BigMatrix.from_rows(U, rows), D, BigMatrix.from_rows(V, cols),
            BigMatrix.from_rows(Ui, rows) if Ui is not None else None)


# ---------------------------------------------------------------------------
# Lattices and solution sets
# ---------------------------------------------------------------------------

def lattice_basis(vectors: Iterable[Sequence[int]], n: int, modulus: Optional[int] = None) -> list[list[int]]:
    """Hermite basis of the lattice spanned by ``vectors`` (plus modulus·Z^n).

    Rows come back in echelon order with positive pivots; entries above each
    pivot are reduced into [0, pivot).  With a modulus, rows equal to
    modulus·e_j are implicit and omitted, and entries are reduced mod modulus.
    """
    m = modulus
    pool = [list(v) for v in vectors]
    if m is not None:
        pool = [[x % m for x in v] for v in pool]
    pool = [v for v in pool if any(v)]
    basis: list[list[int]] = []
    pivots: list[int] = []
    for j in range(n):
        active = [v for v in pool if v[j]]
        if m is not None:
            e = [0] * n
            e[j] = m
            active.append(e)
        pool = [v for v in pool if not v[j]]
        if not active:
            continue
        piv = active[0]
        for v in active[1:]:
            a, b = piv[j], v[j]
            if b % a == 0:
                q = b // a
                rem = [y - q * x for x, y in zip(piv, v)]
            else:
                g, x, y = xgcd(a, b)
                new_piv = [x * p + y * q for p, q in zip(piv, v)]
                rem = [(-(b // g)) * p + (a // g) * q for p, q in zip(piv, v)]
                piv = new_piv
            if m is not None:
                rem = [t % m for t in rem]
            if any(rem):
                pool.append(rem)
        if piv[j] < 0:
            piv = [-x for x in piv]
        if m is not None:
            piv = [x % m for x in piv]
            # (m / pivot) * piv lands in columns > j
            k = m // gcd(piv[j], m)
            extra = [(k * x) % m for x in piv]
            if any(extra):
                pool.append(extra)
            if piv[j] % m == 0:
                continue
            g = gcd(piv[j], m)
            if g != piv[j]:
                # rescale so the pivot divides the modulus
                _, x, _ = xgcd(piv[j], m)
                piv = [(x * t) % m for t in piv]
        basis.append(piv)
        pivots.append(j)
    # reduce above pivots
    for r in range(len(basis)):
        j = pivots[r]
        for s in range(r):
            q = basis[s][j] // basis[r][j]
            if q:
                basis[s] = [a - q * b for a, b in zip(basis[s], basis[r])]
                if m is not None:
                    basis[s] = [a % m for a in basis[s]]
    return basis


def _reduce_vector(v: Sequence[int], basis: list[list[int]], modulus: Optional[int]) -> list[int]:
    v = list(v)
    for row in basis:
        j = next(k for k, x in enumerate(row) if x)
        q = v[j] // row[j]
        if q:
            v = [a - q * b for a, b in zip(v, row)]
    if modulus is not None:
        v = [a % modulus for a in v]
    return v


@dataclass(frozen=True)
class AffineSolutionSet:
    particular: Optional[tuple[int, ...]]
    kernel_basis: tuple[tuple[int, ...], ...]
    modulus: Optional[int]

    @property
    def empty(self) -> bool:
        return self.particular is None

    def __bool__(self) -> bool:
        return self.particular is not None

    def contains(self, x: Sequence[int]) -> bool:
        if self.particular is None:
            return False
        diff = [a - b for a, b in zip(x, self.particular)]
        red = _reduce_vector(diff, [list(r) for r in self.kernel_basis], self.modulus)
        return not any(red)


def _canonical_set(particular, kernel_vectors, n, modulus) -> AffineSolutionSet:
    basis = lattice_basis(kernel_vectors, n, modulus)
    if particular is None:
        return AffineSolutionSet(None, tuple(tuple(r) for r in basis), modulus)
    p = _reduce_vector(particular, basis, modulus)
    return AffineSolutionSet(tuple(p), tuple(tuple(r) for r in basis), modulus)


def solve_linear(A: BigMatrix, b: Sequence[int], modulus: Optional[int] = None) -> AffineSolutionSet:
    """All x with A·x ≡ b (mod modulus), or over Z when modulus is None.

    The particular solution is reduced against the kernel lattice, so the
    answer is canonical: equal systems give equal outputs.
    """
    if len(b) != A.rows:
        raise ValueError("right-hand side has wrong length")
    n = A.cols
    if modulus is not None:
        if modulus < 1:
            raise ValueError("modulus must be positive")
        if modulus == 1:
            return AffineSolutionSet(tuple([0] * n), (), 1)
        U, D, V, _ = diagonalize_mod(A, modulus)
        c = [x % modulus for x in U.apply(b)]
        y = [0] * n
        steps: list[list[int]] = []
        for i in range(A.rows):
            d = D[i] % modulus if i < len(D) else 0
            g = gcd(d, modulus)
            if c[i] % g:
                return AffineSolutionSet(None, (), modulus)
            if i < n:
                mg = modulus // g
                if d:
                    y[i] = (c[i] // g) * pow(d // g, -1, mg) % mg if mg > 1 else 0
                e = [0] * n
                e[i] = mg
                steps.append(V.apply(e))
        for i in range(A.rows, n):
            e = [0] * n
            e[i] = 1
            steps.append(V.apply(e))
        x = V.apply(y)
        return _canonical_set(x, steps, n, modulus)
    dec = smith_normal_form(A)
    c = dec.U.apply(b)
    diag = dec.diagonal
    y = [0] * n
    kernel = []
    for i in range(A.rows):
        d = diag[i] if i < len(diag) else 0
        if d == 0:
            if c[i] != 0:
                return AffineSolutionSet(None, (), None)
        else:
            if c[i] % d:
                return AffineSolutionSet(None, (), None)
            y[i] = c[i] // d
    for i in range(n):
        d = diag[i] if i < len(diag) else 0
        if d == 0:
            e = [0] * n
            e[i] = 1
            kernel.append(dec.V.apply(e))
    return _canonical_set(dec.V.apply(y), kernel, n, None)


def solve_congruences(A: BigMatrix, b: Sequence[int], moduli: Sequence[int]) -> AffineSolutionSet:
    """Solve row i of A·x ≡ b modulo moduli[i]; a modulus of 0 means equality over Z."""
    if len(moduli) != A.rows:
        raise ValueError("one modulus per row")
    n = A.cols
    if all(mo > 0 for mo in moduli):
        L = lcm(*moduli) if moduli else 1
        rows = [[(L // mo) * x for x in A.row(i)] for i, mo in enumerate(moduli)]
        rhs = [(L // mo) * v for v, mo in zip(b, moduli)]
        return solve_linear(BigMatrix.from_rows(rows, n), rhs, L)
    aux = [i for i, mo in enumerate(moduli) if mo > 0]
    rows = []
    for i in range(A.rows):
        extra = [moduli[i] if k == i else 0 for k in aux]
        rows.append(A.row(i) + extra)
    full = solve_linear(BigMatrix.from_rows(rows, n + len(aux)), list(b), None)
    if full.particular is None:
        return AffineSolutionSet(None, (), None)
    return _canonical_set(full.particular[:n], [v[:n] for v in full.kernel_basis], n, None)


def solve_bilinear_membership(F: BigMatrix, R_A: BigMatrix, R_B: BigMatrix,
                              modulus: Optional[int] = None) -> AffineSolutionSet:
    """Find Y with R_B·Y = F·R_A (mod modulus), Y vectorised column by column."""
    if F.cols != R_A.rows or F.rows != R_B.rows:
        raise ValueError("incompatible shapes")
    target = F @ R_A
    k = target.cols
    big = block_diag(*([R_B] * k)) if k else BigMatrix.zeros(0, 0)
    rhs = [v for j in range(k) for v in target.col(j)]
    return solve_linear(big, rhs, modulus)
