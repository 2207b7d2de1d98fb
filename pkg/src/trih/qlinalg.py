"""Exact linear algebra over Q and a little over Z.

Everything here works with :class:`fractions.Fraction`, which already keeps
numerator and denominator in lowest terms with a positive denominator.  Dense
matrices are wrapped in :class:`QMat`; the elimination routines also accept
sparse rows (``dict`` column -> value), which is what the chain-complex code
feeds them.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import Iterable, Sequence

Q = Fraction
ZERO = Fraction(0)
ONE = Fraction(1)


class LinAlgError(ValueError):
    pass


def _q(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


class QMat:
    """Dense rational matrix stored row-major as a tuple of tuples."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, data: Iterable[Iterable] = (), cols: int | None = None):
        rows = tuple(tuple(_q(x) for x in r) for r in data)
        if cols is None:
            cols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != cols:
                raise LinAlgError("ragged matrix rows")
        self.data = rows
        self.rows = len(rows)
        self.cols = cols

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "QMat":
        return cls([[ZERO] * cols for _ in range(rows)], cols)

    @classmethod
    def identity(cls, n: int) -> "QMat":
        return cls([[ONE if i == j else ZERO for j in range(n)] for i in range(n)], n)

    @classmethod
    def from_sparse(cls, rows: Sequence[dict], cols: int) -> "QMat":
        out = []
        for r in rows:
            line = [ZERO] * cols
            for j, v in r.items():
                line[j] = _q(v)
            out.append(line)
        return cls(out, cols)

    def sparse_rows(self) -> list[dict]:
        return [{j: v for j, v in enumerate(r) if v} for r in self.data]

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i][j]

    def row(self, i: int) -> tuple:
        return self.data[i]

    def transpose(self) -> "QMat":
        return QMat([[self.data[i][j] for i in range(self.rows)] for j in range(self.cols)], self.rows)

    def __matmul__(self, other: "QMat") -> "QMat":
        if self.cols != other.rows:
            raise LinAlgError("shape mismatch in product")
        cols_t = list(zip(*other.data)) if other.rows else [()] * other.cols
        out = []
        for r in self.data:
            nz = [(k, a) for k, a in enumerate(r) if a]
            out.append([sum((a * c[k] for k, a in nz), ZERO) for c in cols_t])
        return QMat(out, other.cols)

    def apply(self, v: Sequence) -> list:
        if len(v) != self.cols:
            raise LinAlgError("vector length mismatch")
        return [sum((a * _q(b) for a, b in zip(r, v) if a and b), ZERO) for r in self.data]

    def vstack(self, other: "QMat") -> "QMat":
        if self.cols != other.cols:
            raise LinAlgError("column mismatch in vstack")
        return QMat(self.data + other.data, self.cols)

    def to_lists(self) -> list[list[Fraction]]:
        return [list(r) for r in self.data]

    def __eq__(self, other) -> bool:
        return isinstance(other, QMat) and (self.rows, self.cols, self.data) == (other.rows, other.cols, other.data)

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.data))

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(x) for x in r) for r in self.data)
        return f"QMat({self.rows}x{self.cols}: [{body}])"


# ---------------------------------------------------------------------------
# elimination on sparse rows


def eliminate(rows: Iterable[dict], reduce_above: bool = True) -> tuple[list[dict], list[int]]:
    """Row-reduce sparse rows; returns (nonzero reduced rows, pivots).

    Pivots are taken at the first nonzero column of each surviving row.  With
    ``reduce_above`` the result is the reduced row echelon form, sorted by pivot.
    """
    basis: dict[int, dict] = {}  # pivot column -> row normalised to 1 there
    for r in rows:
        r = {j: _q(v) for j, v in r.items() if v}
        while r:
            j = min(r)
            b = basis.get(j)
            if b is None:
                inv = 1 / r[j]
                r = {k: v * inv for k, v in r.items()}
                basis[j] = r
                break
            c = r[j]
            for k, v in b.items():
                nv = r.get(k, ZERO) - c * v
                if nv:
                    r[k] = nv
                else:
                    r.pop(k, None)
    pivots = sorted(basis)
    if reduce_above:
        for j in reversed(pivots):
            b = basis[j]
            for i in pivots:
                if i >= j:
                    break
                r = basis[i]
                c = r.get(j)
                if c:
                    for k, v in b.items():
                        nv = r.get(k, ZERO) - c * v
                        if nv:
                            r[k] = nv
                        else:
                            r.pop(k, None)
    return [basis[j] for j in pivots], pivots


def sparse_rank(rows: Iterable[dict]) -> int:
    return len(eliminate(rows, reduce_above=False)[1])


def sparse_kernel(rows: Sequence[dict], ncols: int) -> list[dict]:
    """Basis of {x : rows . x = 0} as sparse vectors, one per free column."""
    red, piv = eliminate(rows)
    pivset = set(piv)
    out = []
    for f in range(ncols):
        if f in pivset:
            continue
        v = {f: ONE}
        for j, r in zip(piv, red):
            c = r.get(f)
            if c:
                v[j] = -c
        out.append(v)
    return out


def transpose_sparse(rows: Sequence[dict], ncols: int) -> list[dict]:
    cols: list[dict] = [dict() for _ in range(ncols)]
    for i, r in enumerate(rows):
        for j, v in r.items():
            cols[j][i] = v
    return cols


def reduce_vector(v: dict, red: Sequence[dict], piv: Sequence[int]) -> dict:
    """Reduce a sparse vector by rref rows (eliminating pivot columns)."""
    v = {j: _q(x) for j, x in v.items() if x}
    for j, r in zip(piv, red):
        c = v.get(j)
        if c:
            for k, x in r.items():
                nv = v.get(k, ZERO) - c * x
                if nv:
                    v[k] = nv
                else:
                    v.pop(k, None)
    return v


# ---------------------------------------------------------------------------
# dense front end


def rref(m: QMat) -> tuple[QMat, list[int]]:
    """Reduced row echelon form; zero rows are kept at the bottom."""
    red, piv = eliminate(m.sparse_rows())
    dense = QMat.from_sparse(red, m.cols).to_lists()
    dense += [[ZERO] * m.cols for _ in range(m.rows - len(red))]
    return QMat(dense, m.cols), piv


def rank(m: QMat) -> int:
    return sparse_rank(m.sparse_rows())


def dense_vector(v: dict, n: int) -> tuple:
    out = [ZERO] * n
    for j, x in v.items():
        out[j] = x
    return tuple(out)


class Subspace:
    """A subspace of Q^n, stored by the rref of a spanning set."""

    __slots__ = ("ambient_dim", "basis", "_red", "_piv")

    def __init__(self, ambient_dim: int, vectors: Iterable = ()):
        sparse = []
        for v in vectors:
            if isinstance(v, dict):
                sparse.append(v)
            else:
                v = list(v)
                if len(v) != ambient_dim:
                    raise LinAlgError("vector does not live in the ambient space")
                sparse.append({j: x for j, x in enumerate(v) if x})
        red, piv = eliminate(sparse)
        self.ambient_dim = ambient_dim
        self._red = red
        self._piv = piv
        self.basis = QMat.from_sparse(red, ambient_dim) if red else QMat((), ambient_dim)

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, ({i: ONE} for i in range(n)))

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n, ())

    @property
    def dim(self) -> int:
        return len(self._red)

    @property
    def pivots(self) -> list[int]:
        return list(self._piv)

    def sparse_basis(self) -> list[dict]:
        return [dict(r) for r in self._red]

    def reduce(self, v) -> dict:
        if not isinstance(v, dict):
            v = {j: x for j, x in enumerate(v) if x}
        return reduce_vector(v, self._red, self._piv)

    def contains(self, v) -> bool:
        return not self.reduce(v)

    def coordinates(self, v) -> list[Fraction]:
        """Coordinates of v in the rref basis (v must lie in the subspace)."""
        if not isinstance(v, dict):
            v = {j: _q(x) for j, x in enumerate(v) if x}
        if self.reduce(v):
            raise LinAlgError("vector not in subspace")
        return [v.get(j, ZERO) for j in self._piv]

    def is_subspace_of(self, other: "Subspace") -> bool:
        return all(other.contains(r) for r in self._red)

    def annihilator(self) -> "Subspace":
        return Subspace(self.ambient_dim, sparse_kernel(self._red, self.ambient_dim))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Subspace)
            and self.ambient_dim == other.ambient_dim
            and self._piv == other._piv
            and self._red == other._red
        )

    def __hash__(self) -> int:
        return hash((self.ambient_dim, self.basis))

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim} in Q^{self.ambient_dim})"


def kernel_basis(m: QMat) -> Subspace:
    return Subspace(m.cols, sparse_kernel(m.sparse_rows(), m.cols))


def image(m: QMat) -> Subspace:
    """Column space of m."""
    return Subspace(m.rows, transpose_sparse(m.sparse_rows(), m.cols))


def sum_intersect(a: Subspace, b: Subspace) -> tuple[Subspace, Subspace]:
    if a.ambient_dim != b.ambient_dim:
        raise LinAlgError("dimension mismatch")
    n = a.ambient_dim
    total = Subspace(n, a.sparse_basis() + b.sparse_basis())
    inter = intersect(a, b)
    return total, inter


def intersect(a: Subspace, b: Subspace) -> Subspace:
    if a.ambient_dim != b.ambient_dim:
        raise LinAlgError("dimension mismatch")
    n = a.ambient_dim
    if a.dim == 0 or b.dim == 0:
        return Subspace.zero(n)
    # x in a and x in b  <=>  x kills the annihilators of both
    ann = a.annihilator().sparse_basis() + b.annihilator().sparse_basis()
    return Subspace(n, sparse_kernel(ann, n))


def intersect_all(spaces: Sequence[Subspace], n: int) -> Subspace:
    if not spaces:
        return Subspace.full(n)
    ann: list[dict] = []
    for s in spaces:
        if s.ambient_dim != n:
            raise LinAlgError("dimension mismatch")
        ann.extend(s.annihilator().sparse_basis())
    return Subspace(n, sparse_kernel(ann, n))


class QuotientSpace:
    """ambient / killed with explicit coordinates.

    Coordinates of the quotient are read off a complement of ``killed`` inside
    ``ambient`` whose basis has zeros in the pivot columns of ``killed``.
    """

    __slots__ = ("ambient", "killed", "_comp", "_comp_piv")

    def __init__(self, ambient: Subspace, killed: Subspace):
        if ambient.ambient_dim != killed.ambient_dim:
            raise LinAlgError("dimension mismatch")
        if not killed.is_subspace_of(ambient):
            raise LinAlgError("killed subspace is not inside the ambient subspace")
        self.ambient = ambient
        self.killed = killed
        reduced = [killed.reduce(r) for r in ambient.sparse_basis()]
        self._comp, self._comp_piv = eliminate(reduced)

    @classmethod
    def of_full(cls, n: int, killed_vectors: Iterable = ()) -> "QuotientSpace":
        return cls(Subspace.full(n), Subspace(n, killed_vectors))

    @property
    def dim(self) -> int:
        return len(self._comp)

    @property
    def ambient_dim(self) -> int:
        return self.ambient.ambient_dim

    def project(self, v) -> list[Fraction]:
        if not isinstance(v, dict):
            v = {j: x for j, x in enumerate(v) if x}
        if not self.ambient.contains(v):
            raise LinAlgError("vector not in ambient subspace")
        r = self.killed.reduce(v)
        return [r.get(j, ZERO) for j in self._comp_piv]

    def project_sparse(self, v: dict) -> dict:
        r = self.killed.reduce(v)
        out = {}
        for i, j in enumerate(self._comp_piv):
            x = r.get(j)
            if x:
                out[i] = x
        return out

    def lift(self, coords: Sequence) -> list[Fraction]:
        if len(coords) != self.dim:
            raise LinAlgError("coordinate length mismatch")
        out = [ZERO] * self.ambient_dim
        for c, r in zip(coords, self._comp):
            c = _q(c)
            if c:
                for k, x in r.items():
                    out[k] += c * x
        return out

    def lift_basis(self, i: int) -> dict:
        return dict(self._comp[i])

    def __repr__(self) -> str:
        return f"QuotientSpace(dim={self.dim}: {self.ambient.dim}/{self.killed.dim} in Q^{self.ambient_dim})"


def solve(m: QMat, b: Sequence) -> list[Fraction] | None:
    """One solution x of m x = b (free variables set to zero), or None."""
    rows = []
    for r, bi in zip(m.sparse_rows(), b):
        rr = dict(r)
        if bi:
            rr[m.cols] = _q(bi)
        rows.append(rr)
    red, piv = eliminate(rows)
    if piv and piv[-1] == m.cols:
        return None
    x = [ZERO] * m.cols
    for j, r in zip(piv, red):
        x[j] = r.get(m.cols, ZERO)
    return x


# ---------------------------------------------------------------------------
# integer helpers


def primitive_vector(v: Sequence[int]) -> tuple[int, ...]:
    v = tuple(int(x) for x in v)
    g = 0
    for x in v:
        g = gcd(g, x)
    if g == 0:
        raise LinAlgError("zero vector has no primitive generator")
    return tuple(x // g for x in v)


def content(v: Sequence[int]) -> int:
    g = 0
    for x in v:
        g = gcd(g, int(x))
    return g


def column_echelon(a: Sequence[Sequence[int]], ncols: int) -> tuple[list[list[int]], list[list[int]], int]:
    """Integer column reduction.

    Returns (H, V, r) with ``a . V = H`` where V is unimodular, H has its first
    r columns in echelon form and its remaining columns zero.  The last
    ``ncols - r`` columns of V form a lattice basis of the integer kernel.
    """
    h = [[int(x) for x in row] for row in a]
    n = ncols
    v = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def colop(i: int, j: int, a11: int, a12: int, a21: int, a22: int) -> None:
        # (col_i, col_j) <- (a11 col_i + a21 col_j, a12 col_i + a22 col_j)
        for mat in (h, v):
            for row in mat:
                x, y = row[i], row[j]
                row[i], row[j] = a11 * x + a21 * y, a12 * x + a22 * y

    r = 0
    for row_idx in range(len(h)):
        if r >= n:
            break
        for j in range(r + 1, n):
            x, y = h[row_idx][r], h[row_idx][j]
            if y == 0:
                continue
            g, s, t = _xgcd(x, y)
            # new col_r = s col_r + t col_j ; new col_j = (-y/g) col_r + (x/g) col_j
            colop(r, j, s, -y // g, t, x // g)
        if h[row_idx][r] != 0:
            if h[row_idx][r] < 0:
                for mat in (h, v):
                    for row in mat:
                        row[r] = -row[r]
            r += 1
    return h, v, r


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def integer_kernel(a: Sequence[Sequence[int]], ncols: int) -> list[tuple[int, ...]]:
    """Lattice basis of {x in Z^ncols : a x = 0}."""
    _, v, r = column_echelon(a, ncols)
    return [tuple(v[i][j] for i in range(ncols)) for j in range(r, ncols)]


def max_minor_gcd(rays: Sequence[Sequence[int]]) -> int:
    """gcd of the maximal minors of the matrix whose rows are ``rays``.

    Equals the product of the Smith invariant factors when the rows are
    independent, and 0 otherwise.
    """
    k = len(rays)
    if k == 0:
        return 1
    n = len(rays[0])
    if k > n:
        return 0
    h, _, r = column_echelon(rays, n)
    if r < k:
        return 0
    det = 1
    # H restricted to its first k columns is lower triangular after echelon
    for i in range(k):
        det *= h[i][i]
    return abs(det)


def is_unimodular(rays: Sequence[Sequence[int]]) -> bool:
    """True iff the rays extend to a Z-basis of the lattice."""
    rays = [tuple(int(x) for x in r) for r in rays]
    if not rays:
        raise LinAlgError("empty ray list")
    return max_minor_gcd(rays) == 1


def smith_invariant_factors(a: Sequence[Sequence[int]]) -> list[int]:
    """Nonzero invariant factors via determinantal divisors (desk-scale only)."""
    rows = [tuple(int(x) for x in r) for r in a]
    if not rows:
        return []
    n = len(rows[0])
    out = []
    prev = 1
    for k in range(1, min(len(rows), n) + 1):
        g = 0
        for ri in combinations(range(len(rows)), k):
            for ci in combinations(range(n), k):
                g = gcd(g, _int_det([[rows[i][j] for j in ci] for i in ri]))
        if g == 0:
            break
        out.append(g // prev)
        prev = g
    return out


def _int_det(m: list[list[int]]) -> int:
    m = [list(r) for r in m]
    n = len(m)
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1] if n else 1


def det(m: QMat) -> Fraction:
    if m.rows != m.cols:
        raise LinAlgError("determinant of a non-square matrix")
    a = m.to_lists()
    n = m.rows
    d = ONE
    for k in range(n):
        p = next((i for i in range(k, n) if a[i][k]), None)
        if p is None:
            return ZERO
        if p != k:
            a[k], a[p] = a[p], a[k]
            d = -d
        d *= a[k][k]
        inv = 1 / a[k][k]
        for i in range(k + 1, n):
            c = a[i][k] * inv
            if c:
                for j in range(k, n):
                    a[i][j] -= c * a[k][j]
    return d
