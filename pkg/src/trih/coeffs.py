"""Coefficient spaces attached to the cells of a compactified fan cycle.

Three systems live here:

* the weighted multi-tangent spaces F_{p,w}(S), used for chains;
* their duals F^{p,w}(R) on the smooth part;
* the ambient-form spaces F^p(R), used for tropical cohomology.

Each top cell P = (0, sigma) has the exterior power of span(sigma) as its
space, written in the basis of p-subsets of sigma's rays (positions in the
sorted ray list).  A space on a smaller cell S is a quotient of the direct sum
of the blocks of the top cells above S.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Sequence

from .compactified import CCell, CompactifiedCellComplex
from .exterior import contraction, exterior_power_matrix, monomials, wedge, from_dense, to_dense
from .fans import lattice_coordinates
from .qlinalg import (
    ONE,
    ZERO,
    LinAlgError,
    QMat,
    QuotientSpace,
    Subspace,
    integer_kernel,
    sparse_kernel,
)

__all__ = [
    "CoefficientError",
    "CoefficientSpace",
    "CoefficientSystem",
    "FiltrationDegrees",
    "FilPairing",
    "IKMZSystem",
    "allowed_subspace",
    "allowed_monomials",
    "adapted_basis",
    "contraction",
    "dual_restriction",
    "f_ikmz",
    "f_pw",
    "f_pw_dual",
    "fil_and_wedge",
    "vu_degrees",
    "cell_vu_degrees",
    "coefficient_system",
    "ikmz_system",
]


class CoefficientError(ValueError):
    pass


@dataclass(frozen=True)
class CoefficientSpace:
    cell: CCell
    kind: str
    p: int
    space: QuotientSpace
    slots: tuple[CCell, ...]
    block_dim: int

    @property
    def dim(self) -> int:
        return self.space.dim


def _positions(top: CCell, rays) -> list[int]:
    order = sorted(top.sigma)
    return [order.index(r) for r in sorted(rays)]


class CoefficientSystem:
    """F_{p,w} for a fixed p on every cell, with the maps between them.

    ``lift_shift`` perturbs the lifts of the normal vectors at smooth walls
    by vectors in the wall's span with weighted sum zero; the resulting spaces
    must not depend on it.
    """

    def __init__(self, x: CompactifiedCellComplex, p: int, lift_shift: int = 0):
        d = x.d
        if p < 0 or p > d:
            raise CoefficientError(f"p = {p} outside 0..{d}")
        self.x = x
        self.p = p
        self.d = d
        self.block_dim = comb(d, p)
        self.lift_shift = lift_shift
        self._spaces: dict[CCell, CoefficientSpace] = {}
        self._iotas: dict[tuple[CCell, CCell], list[dict]] = {}
        self._walls: dict[CCell, list[dict]] = {}
        self._lock = threading.Lock()

    # -- ambient bookkeeping -------------------------------------------------

    def tops(self, cell: CCell) -> list[CCell]:
        return self.x.tops_over(cell)

    def _offsets(self, cell: CCell) -> dict[CCell, int]:
        return {t: i * self.block_dim for i, t in enumerate(self.tops(cell))}

    # -- kernels at codimension one --------------------------------------------

    def wall_relations(self, wall: CCell) -> list[dict]:
        """Spanning set of the kernel of (sum of top blocks) -> F(wall)."""
        got = self._walls.get(wall)
        if got is not None:
            return got
        if wall.tau:
            rels = self._sedentary_wall(wall)
        else:
            rels = self._smooth_wall(wall)
        with self._lock:
            self._walls.setdefault(wall, rels)
        return rels

    def _sedentary_wall(self, wall: CCell) -> list[dict]:
        (top,) = self.tops(wall)
        (pos,) = _positions(top, wall.tau)
        return [{i: ONE} for i, m in enumerate(monomials(self.d, self.p)) if pos in m]

    def lifts(self, wall: CCell) -> dict[CCell, dict[int, Fraction]]:
        """Lifted normal vectors, in each top cell's ray basis, with weighted sum 0."""
        x, fan = self.x, self.x.cycle.fan
        rho = sorted(wall.sigma)
        tops = self.tops(wall)
        total = [0] * fan.rank
        extra = {}
        for t in tops:
            (r,) = tuple(t.sigma - wall.sigma)
            extra[t] = r
            w = x.cycle.w(t.sigma)
            for i, v in enumerate(fan.rays[r]):
                total[i] += w * v
        coords = lattice_coordinates(fan, wall.sigma, total)
        if coords is None:
            raise CoefficientError(f"cycle is not balanced at {wall}")
        shifts = {t: [ZERO] * len(rho) for t in tops}
        if self.lift_shift and len(tops) > 1:
            acc = [ZERO] * len(rho)
            for k, t in enumerate(tops[1:], start=1):
                s = [Fraction((self.lift_shift * (k + 1) * (j + 2)) % 7 - 3, j + 1) for j in range(len(rho))]
                shifts[t] = s
                w = x.cycle.w(t.sigma)
                acc = [a + w * b for a, b in zip(acc, s)]
            w0 = x.cycle.w(tops[0].sigma)
            shifts[tops[0]] = [-a / w0 for a in acc]
        out = {}
        for k, t in enumerate(tops):
            order = sorted(t.sigma)
            vec = {order.index(extra[t]): ONE}
            corr = [ZERO] * len(rho)
            if k == 0:
                w0 = x.cycle.w(t.sigma)
                corr = [-c / w0 for c in coords]
            for j, r in enumerate(rho):
                c = corr[j] + shifts[t][j]
                if c:
                    vec[order.index(r)] = c
            out[t] = vec
        return out

    def _smooth_wall(self, wall: CCell) -> list[dict]:
        p, d = self.p, self.d
        tops = self.tops(wall)
        off = {t: i * self.block_dim for i, t in enumerate(tops)}
        index = {m: i for i, m in enumerate(monomials(d, p))}
        rels: list[dict] = []
        rho = sorted(wall.sigma)
        # identify the common part in all slots
        for u in monomials(len(rho), p):
            forms = []
            for t in tops:
                pos = tuple(sorted(_positions(t, [rho[j] for j in u])))
                forms.append((t, pos))
            t0, m0 = forms[0]
            for t, m in forms[1:]:
                rels.append({off[t0] + index[m0]: ONE, off[t] + index[m]: -ONE})
        # weighted sum of lifted normals wedge anything from the wall
        if p >= 1:
            lifts = self.lifts(wall)
            for u in monomials(len(rho), p - 1):
                rel: dict = {}
                for t in tops:
                    w = self.x.cycle.w(t.sigma)
                    upos = tuple(sorted(_positions(t, [rho[j] for j in u])))
                    vform = {(i,): c for i, c in lifts[t].items()}
                    prod = wedge(vform, {upos: ONE})
                    for m, c in prod.items():
                        key = off[t] + index[m]
                        v = rel.get(key, ZERO) + w * c
                        if v:
                            rel[key] = v
                        else:
                            rel.pop(key, None)
                if rel:
                    rels.append(rel)
        return rels

    # -- spaces and maps -----------------------------------------------------

    def walls_over(self, cell: CCell) -> list[CCell]:
        d = self.d
        return [r for r in self.x.cells_of_dim(d - 1) if cell.is_face_of(r)] if d >= 1 else []

    def kernel(self, cell: CCell) -> list[dict]:
        off = self._offsets(cell)
        out = []
        for wall in self.walls_over(cell):
            woff = {t: i * self.block_dim for i, t in enumerate(self.tops(wall))}
            shift = {woff[t]: off[t] for t in woff}
            for rel in self.wall_relations(wall):
                moved = {}
                for k, v in rel.items():
                    base = k - k % self.block_dim
                    moved[shift[base] + k % self.block_dim] = v
                out.append(moved)
        return out

    def space(self, cell: CCell) -> CoefficientSpace:
        got = self._spaces.get(cell)
        if got is not None:
            return got
        if cell not in self.x.index:
            raise CoefficientError(f"{cell} is not a cell of the complex")
        tops = self.tops(cell)
        n = len(tops) * self.block_dim
        q = QuotientSpace(Subspace.full(n), Subspace(n, self.kernel(cell)))
        cs = CoefficientSpace(cell, "F_pw", self.p, q, tuple(tops), self.block_dim)
        with self._lock:
            self._spaces.setdefault(cell, cs)
        return self._spaces[cell]

    def iota(self, small: CCell, big: CCell) -> list[dict]:
        """Matrix of F(big) -> F(small) as sparse columns (one per basis vector of F(big))."""
        key = (small, big)
        got = self._iotas.get(key)
        if got is not None:
            return got
        if not small.is_face_of(big):
            raise CoefficientError(f"{small} is not a face of {big}")
        sb, ss = self.space(big), self.space(small)
        offs = self._offsets(small)
        shift = {i * self.block_dim: offs[t] for i, t in enumerate(sb.slots)}
        cols = []
        for i in range(sb.dim):
            v = sb.space.lift_basis(i)
            moved = {shift[k - k % self.block_dim] + k % self.block_dim: c for k, c in v.items()}
            cols.append(ss.space.project_sparse(moved))
        with self._lock:
            self._iotas.setdefault(key, cols)
        return cols

    def embed(self, cell: CCell, top: CCell, vec: dict) -> dict:
        """Image in F(cell) of an element of the top block (monomial index -> value)."""
        offs = self._offsets(cell)
        if top not in offs:
            raise CoefficientError(f"{top} does not contain {cell}")
        o = offs[top]
        return self.space(cell).space.project_sparse({o + k: v for k, v in vec.items()})


def coefficient_system(x: CompactifiedCellComplex, p: int) -> CoefficientSystem:
    cache = x.cache
    key = ("F_pw", p)
    with x.lock:
        if key not in cache:
            cache[key] = CoefficientSystem(x, p)
        return cache[key]


def f_pw(x: CompactifiedCellComplex, cell: CCell, p: int) -> CoefficientSpace:
    return coefficient_system(x, p).space(cell)


def f_pw_dual(x: CompactifiedCellComplex, cell: CCell, p: int) -> CoefficientSpace:
    """Hom(F_{p,w}(cell), Q) as the annihilator of the kernel, for smooth cells."""
    if not x.is_smooth(cell):
        raise CoefficientError(f"{cell} is not in the smooth part")
    cs = f_pw(x, cell, p)
    n = cs.space.ambient_dim
    ann = cs.space.killed.annihilator()
    q = QuotientSpace(ann, Subspace.zero(n))
    return CoefficientSpace(cell, "F_pw_dual", p, q, cs.slots, cs.block_dim)


def dual_restriction(x: CompactifiedCellComplex, small: CCell, big: CCell, p: int) -> list[dict]:
    """F^{p,w}(small) -> F^{p,w}(big), the transpose of iota, as sparse columns."""
    src, dst = f_pw_dual(x, small, p), f_pw_dual(x, big, p)
    bd = src.block_dim
    pos = {t: i for i, t in enumerate(src.slots)}
    cols = []
    for i in range(src.dim):
        phi = src.space.lift_basis(i)
        out = {}
        for j, t in enumerate(dst.slots):
            o = pos[t] * bd
            for k in range(bd):
                c = phi.get(o + k)
                if c:
                    out[j * bd + k] = c
        cols.append(dst.space.project_sparse(out))
    return cols


# ---------------------------------------------------------------------------
# ambient forms


class IKMZSystem:
    """F^p(R): p-forms perpendicular to the sedentarity cone of R, modulo the
    forms vanishing on every top cell above R.

    A space is stored as its image in the direct sum, over top cells P above
    R, of the p-forms on span(P) (dual monomial basis)."""

    def __init__(self, x: CompactifiedCellComplex, p: int):
        self.x = x
        self.p = p
        self.d = x.d
        self.block_dim = comb(x.d, p) if 0 <= p <= x.d else 0
        self._spaces: dict[CCell, Subspace] = {}
        self._perp: dict = {}
        self._lock = threading.Lock()

    def perp_basis(self, tau) -> list[tuple[int, ...]]:
        tau = frozenset(tau)
        got = self._perp.get(tau)
        if got is None:
            fan = self.x.cycle.fan
            got = integer_kernel(fan.ray_matrix(tau), fan.rank)
            self._perp[tau] = got
        return got

    def _evaluation(self, top: CCell, forms) -> QMat:
        fan = self.x.cycle.fan
        order = sorted(top.sigma)
        e = QMat([[sum(a * b for a, b in zip(m, fan.rays[r])) for m in forms] for r in order], len(forms))
        return exterior_power_matrix(e, self.p)

    def space(self, cell: CCell) -> Subspace:
        got = self._spaces.get(cell)
        if got is not None:
            return got
        tops = self.x.tops_over(cell)
        n = len(tops) * self.block_dim
        forms = self.perp_basis(cell.tau)
        if self.p > len(forms) or not tops or self.block_dim == 0:
            sub = Subspace.zero(n)
        else:
            blocks = [self._evaluation(t, forms) for t in tops]
            ncols = blocks[0].cols
            vecs = []
            for j in range(ncols):
                v = {}
                for b, blk in enumerate(blocks):
                    for i in range(blk.rows):
                        c = blk[i, j]
                        if c:
                            v[b * self.block_dim + i] = c
                vecs.append(v)
            sub = Subspace(n, vecs)
        with self._lock:
            self._spaces.setdefault(cell, sub)
        return self._spaces[cell]

    def restriction(self, small: CCell, big: CCell) -> list[dict]:
        """F^p(small) -> F^p(big) for small a face of big, as sparse columns."""
        if not small.is_face_of(big):
            raise CoefficientError(f"{small} is not a face of {big}")
        src, dst = self.space(small), self.space(big)
        st = self.x.tops_over(small)
        bt = self.x.tops_over(big)
        pos = {t: i for i, t in enumerate(st)}
        bd = self.block_dim
        piv = dst.pivots
        cols = []
        for row in src.sparse_basis():
            out = {}
            for j, t in enumerate(bt):
                o = pos[t] * bd
                for k in range(bd):
                    c = row.get(o + k)
                    if c:
                        out[j * bd + k] = c
            cols.append({i: out[c] for i, c in enumerate(piv) if out.get(c)})
        return cols


def ikmz_system(x: CompactifiedCellComplex, p: int) -> IKMZSystem:
    key = ("F_ikmz", p)
    with x.lock:
        if key not in x.cache:
            x.cache[key] = IKMZSystem(x, p)
        return x.cache[key]


def f_ikmz(x: CompactifiedCellComplex, cell: CCell, p: int) -> CoefficientSpace:
    sys_ = ikmz_system(x, p)
    sub = sys_.space(cell)
    q = QuotientSpace(sub, Subspace.zero(sub.ambient_dim))
    return CoefficientSpace(cell, "F_ikmz", p, q, tuple(x.tops_over(cell)), sys_.block_dim)


# ---------------------------------------------------------------------------
# filtration degrees and allowability


@dataclass(frozen=True)
class FiltrationDegrees:
    v: int
    u: int


def adapted_basis(w: Subspace, u: Subspace, n: int) -> QMat:
    """Columns: a basis of W, extended to U, extended to Q^n (greedy, in order)."""
    if not w.is_subspace_of(u):
        raise CoefficientError("flag violation: W is not contained in U")
    chosen: list[dict] = []
    span = Subspace(n, [])
    for cand in w.sparse_basis() + u.sparse_basis() + [{i: ONE} for i in range(n)]:
        if not span.contains(cand):
            chosen.append(cand)
            span = Subspace(n, chosen)
    return QMat([[c.get(i, ZERO) for c in chosen] for i in range(n)], n)


def vu_degrees(alpha: dict, w: Subspace, u: Subspace, basis: QMat | None = None) -> FiltrationDegrees:
    """v and u of a p-vector relative to the flag W <= U <= Q^n.

    ``alpha`` maps increasing index tuples to coefficients in the standard
    basis.  ``basis`` (columns) may supply any basis adapted to the flag: its
    first dim W columns span W and its first dim U columns span U.
    """
    alpha = {m: Fraction(c) for m, c in alpha.items() if c}
    if not alpha:
        raise CoefficientError("degrees of the zero vector are undefined")
    n = w.ambient_dim
    p = len(next(iter(alpha)))
    b = basis if basis is not None else adapted_basis(w, u, n)
    a, c = w.dim, u.dim
    cols = [[b[i, j] for i in range(n)] for j in range(n)]
    if Subspace(n, cols[:a]) != w or Subspace(n, cols[:c]) != u:
        raise CoefficientError("basis is not adapted to the flag")
    inv = _inverse(b)
    change = exterior_power_matrix(inv, p)
    new = from_dense(change.apply(to_dense(alpha, n, p)), n, p)
    v_deg = min(sum(1 for i in m if i < a) for m in new)
    u_deg = min(sum(1 for i in m if i < c) for m in new)
    return FiltrationDegrees(v_deg, u_deg)


def _inverse(m: QMat) -> QMat:
    n = m.rows
    from .qlinalg import eliminate
    rows = [{**{j: m[i, j] for j in range(n) if m[i, j]}, **{n + i: ONE}} for i in range(n)]
    red, piv = eliminate(rows)
    if piv[:n] != list(range(n)) or len(red) < n:
        raise LinAlgError("singular matrix")
    return QMat([[red[i].get(n + j, ZERO) for j in range(n)] for i in range(n)], n)


def _check_face(top: CCell, s: CCell, d: int) -> None:
    if top.tau or len(top.sigma) != d:
        raise CoefficientError(f"{top} is not a top cell of sedentarity zero")
    if not s.is_face_of(top):
        raise CoefficientError(f"flag violation: {s} is not in the closure of {top}")


def cell_vu_degrees(x: CompactifiedCellComplex, top: CCell, s: CCell, alpha: dict) -> FiltrationDegrees:
    """Degrees of alpha in the exterior power of span(top) (ray-position basis)
    relative to the flag span(tau_S) <= span(sigma_S)."""
    _check_face(top, s, x.d)
    d = x.d
    w = Subspace(d, [{i: ONE} for i in _positions(top, s.tau)])
    u = Subspace(d, [{i: ONE} for i in _positions(top, s.sigma)])
    return vu_degrees(alpha, w, u)


def allowed_monomials(d: int, p: int, q: int, k: int, dim_s: int, tau_pos, sigma_pos) -> list[int]:
    """Indices of monomials of the p-th exterior power meeting the allowability test."""
    tau_pos, sigma_pos = set(tau_pos), set(sigma_pos)
    t = len(tau_pos)
    mons = monomials(d, p)
    if t == 0 and q - k == d - dim_s:
        return list(range(len(mons)))
    out = []
    for i, m in enumerate(mons):
        a = sum(1 for j in m if j in tau_pos)
        b = sum(1 for j in m if j in sigma_pos)
        if q - k + a >= max(2, p + t - b + 1):
            out.append(i)
    return out


def allowed_subspace(x: CompactifiedCellComplex, top: CCell, s: CCell, p: int, q: int, k: int) -> Subspace:
    """Subspace of the p-th exterior power of span(top) of coefficients allowed
    near the stratum s, for a q-dimensional piece meeting it in dimension k."""
    _check_face(top, s, x.d)
    d = x.d
    idx = allowed_monomials(d, p, q, k, s.dim, _positions(top, s.tau), _positions(top, s.sigma))
    return Subspace(comb(d, p), [{i: ONE} for i in idx])


# ---------------------------------------------------------------------------
# filtration duality


@dataclass(frozen=True)
class FilPairing:
    fil: Subspace           # Fil^k of the (d-p)-th power
    left: Subspace          # Fil^(dim S + 2 dim sigma_S - k) of the (d-p)-th power
    right: QuotientSpace    # p-th power modulo Fil^(k+1)
    matrix: QMat

    @property
    def nondegenerate(self) -> bool:
        from .qlinalg import rank
        r = rank(self.matrix) if self.matrix.rows and self.matrix.cols else 0
        return self.left.dim == self.right.dim == r


def _fil(d: int, j: int, k: int, tau_pos, sigma_pos) -> Subspace:
    tau_pos, sigma_pos = set(tau_pos), set(sigma_pos)
    vecs = []
    for i, m in enumerate(monomials(d, j)):
        wt = sum(1 for a in m if a in tau_pos) + sum(1 for a in m if a in sigma_pos)
        if wt >= k:
            vecs.append({i: ONE})
    return Subspace(comb(d, j), vecs)


def fil_and_wedge(x: CompactifiedCellComplex, top: CCell, s: CCell, p: int, k: int) -> FilPairing:
    _check_face(top, s, x.d)
    d = x.d
    if p < 0 or p > d:
        raise CoefficientError(f"p = {p} outside 0..{d}")
    tp, sp = _positions(top, s.tau), _positions(top, s.sigma)
    g = s.dim + 2 * len(s.tau)
    fil = _fil(d, d - p, k, tp, sp)
    left = _fil(d, d - p, g - k, tp, sp)
    right = QuotientSpace(Subspace.full(comb(d, p)), _fil(d, p, k + 1, tp, sp))
    full = tuple(range(d))
    lm, rm = monomials(d, d - p), monomials(d, p)
    rows = []
    for lv in left.sparse_basis():
        lf = {lm[i]: c for i, c in lv.items()}
        line = []
        for j in range(right.dim):
            rv = right.lift_basis(j)
            rf = {rm[i]: c for i, c in rv.items()}
            line.append(wedge(lf, rf).get(full, ZERO))
        rows.append(line)
    return FilPairing(fil, left, right, QMat(rows, right.dim))
