"""Cellular chains with tropical coefficients, the allowable subcomplex, and
the dimension tables built from them.

Chains can live on the native cubical cells or on the barycentric
subdivision.  In both cases the strata used by the allowability test are the
native cells.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .coeffs import (
    _positions,
    allowed_monomials,
    coefficient_system,
    ikmz_system,
)
from .compactified import CCell, CompactifiedCellComplex, barycentric_subdivision
from .parallel import pmap
from .qlinalg import (
    ONE,
    ZERO,
    Subspace,
    intersect_all,
    sparse_kernel,
    sparse_rank,
    transpose_sparse,
)

STRUCTURES = ("native", "barycentric")


class ComplexError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# cell structures


class _Native:
    name = "native"

    def __init__(self, x: CompactifiedCellComplex):
        self.x = x

    def pieces(self, q: int) -> list:
        return self.x.cells_of_dim(q)

    def carrier(self, piece) -> CCell:
        return piece

    def boundary(self, piece):
        return self.x.boundary(piece)

    def meets(self, piece, s: CCell) -> int | None:
        return s.dim if s.is_face_of(piece) else None

    def top_sign(self, piece) -> int:
        return 1


class _Barycentric:
    name = "barycentric"

    def __init__(self, x: CompactifiedCellComplex):
        self.x = x
        with x.lock:
            sub = x.cache.get("subdivision")
            if sub is None:
                sub = barycentric_subdivision(x)
                x.cache["subdivision"] = sub
        self.sub = sub
        self._by_dim: dict[int, list] = {}
        for s in sub.simplices:
            self._by_dim.setdefault(len(s) - 1, []).append(s)

    def pieces(self, q: int) -> list:
        return self._by_dim.get(q, [])

    def carrier(self, piece) -> CCell:
        return self.x.cells[piece[-1]]

    def boundary(self, piece):
        return self.sub.boundary(piece)

    def meets(self, piece, s: CCell) -> int | None:
        return self.sub.stratum_position(piece, s)

    def top_sign(self, piece) -> int:
        return self.sub.orientation_sign(piece)


def structure_of(x: CompactifiedCellComplex, structure: str):
    if structure == "native":
        return _Native(x)
    if structure == "barycentric":
        return _Barycentric(x)
    raise ValueError(f"unknown structure {structure!r}; expected one of {STRUCTURES}")


# ---------------------------------------------------------------------------
# chain complexes


@dataclass
class ChainComplexQ:
    """Graded pieces with sparse boundary matrices stored column by column.

    ``boundary[q][j]`` is the image of the j-th basis vector of C_q in C_{q-1}.
    """

    dims: dict[int, int]
    boundary: dict[int, list[dict]]
    labels: dict[int, list[tuple]] = field(default_factory=dict)

    @property
    def degrees(self) -> list[int]:
        return sorted(self.dims)

    def rank(self, q: int) -> int:
        cols = self.boundary.get(q)
        if not cols:
            return 0
        return sparse_rank(cols)

    def square_is_zero(self) -> bool:
        for q, cols in self.boundary.items():
            lower = self.boundary.get(q - 1)
            if not lower:
                continue
            for col in cols:
                if _apply(lower, col):
                    return False
        return True

    def homology_dims(self) -> dict[int, int]:
        ranks = {q: self.rank(q) for q in self.degrees}
        return {q: self.dims[q] - ranks.get(q, 0) - ranks.get(q + 1, 0) for q in self.degrees}


def _apply(cols: list[dict], vec: dict) -> dict:
    out: dict = {}
    for j, c in vec.items():
        for i, v in cols[j].items():
            nv = out.get(i, ZERO) + c * v
            if nv:
                out[i] = nv
            else:
                out.pop(i, None)
    return out


def _add_into(target: dict, vec: dict, scale, offset: int) -> None:
    for i, v in vec.items():
        k = offset + i
        nv = target.get(k, ZERO) + scale * v
        if nv:
            target[k] = nv
        else:
            target.pop(k, None)


@dataclass
class _Layout:
    pieces: list
    offsets: dict
    dim: int


def _layout(st, q: int, fdim: Callable[[CCell], int]) -> _Layout:
    pieces = st.pieces(q)
    offsets = {}
    n = 0
    for pc in pieces:
        offsets[pc] = n
        n += fdim(st.carrier(pc))
    return _Layout(pieces, offsets, n)


def _chain_data(x: CompactifiedCellComplex, p: int, structure: str):
    key = ("chains", p, structure)
    with x.lock:
        got = x.cache.get(key)
    if got is not None:
        return got
    st = structure_of(x, structure)
    sys_ = coefficient_system(x, p)
    d = x.d
    fdim = lambda c: sys_.space(c).dim  # noqa: E731
    layouts = {q: _layout(st, q, fdim) for q in range(d + 1)}
    boundary: dict[int, list[dict]] = {}
    labels: dict[int, list[tuple]] = {}
    for q in range(d + 1):
        lay = layouts[q]
        cols: list[dict] = []
        labs = []
        for pc in lay.pieces:
            big = st.carrier(pc)
            n = sys_.space(big).dim
            faces = st.boundary(pc) if q > 0 else []
            blocks = []
            for face, sign in faces:
                small = st.carrier(face)
                if small == big:
                    mat = [{i: ONE} for i in range(n)]
                else:
                    mat = sys_.iota(small, big)
                blocks.append((layouts[q - 1].offsets[face], sign, mat))
            for i in range(n):
                col: dict = {}
                for off, sign, mat in blocks:
                    _add_into(col, mat[i], sign, off)
                cols.append(col)
                labs.append((pc, i))
        boundary[q] = cols
        labels[q] = labs
    cc = ChainComplexQ({q: layouts[q].dim for q in layouts}, boundary, labels)
    if not cc.square_is_zero():
        raise ComplexError("boundary of a boundary is not zero")
    data = (st, sys_, layouts, cc)
    with x.lock:
        x.cache[key] = data
    return data


def chain_complex(x: CompactifiedCellComplex, p: int, structure: str = "native") -> ChainComplexQ:
    """C_{p,*}: chains with F_{p,w} coefficients on the chosen cell structure."""
    if p < 0 or p > x.d:
        return ChainComplexQ({}, {}, {})
    return _chain_data(x, p, structure)[3]


def tropical_homology(x: CompactifiedCellComplex, p: int, structure: str = "native") -> dict[int, int]:
    return chain_complex(x, p, structure).homology_dims()


# ---------------------------------------------------------------------------
# tropical cohomology with ambient-form coefficients


def cochain_complex(x: CompactifiedCellComplex, p: int, structure: str = "native") -> ChainComplexQ:
    """C^{p,*} with F^p coefficients.  ``boundary[q]`` holds the coboundary
    C^q -> C^{q+1} column by column."""
    st = structure_of(x, structure)
    sys_ = ikmz_system(x, p)
    d = x.d
    fdim = lambda c: sys_.space(c).dim  # noqa: E731
    layouts = {q: _layout(st, q, fdim) for q in range(d + 1)}
    cob: dict[int, list[dict]] = {q: [dict() for _ in range(layouts[q].dim)] for q in range(d + 1)}
    for q in range(1, d + 1):
        lay = layouts[q]
        for pc in lay.pieces:
            big = st.carrier(pc)
            for face, sign in st.boundary(pc):
                small = st.carrier(face)
                src_off = layouts[q - 1].offsets[face]
                n_small = sys_.space(small).dim
                if small == big:
                    mat = [{i: ONE} for i in range(n_small)]
                else:
                    mat = sys_.restriction(small, big)
                for i in range(n_small):
                    _add_into(cob[q - 1][src_off + i], mat[i], sign, lay.offsets[pc])
    return ChainComplexQ({q: layouts[q].dim for q in layouts}, cob, {})


def tropical_cohomology(x: CompactifiedCellComplex, p: int, structure: str = "native") -> dict[int, int]:
    d = x.d
    if p < 0 or p > d:
        return {q: 0 for q in range(d + 1)}
    cc = cochain_complex(x, p, structure)
    # coboundaries raise degree: H^q = dim C^q - rank d_q - rank d_{q-1}
    ranks = {q: sparse_rank(cols) if cols else 0 for q, cols in cc.boundary.items()}
    for q in range(d + 1):
        nxt = cc.boundary.get(q + 1)
        if nxt:
            for col in cc.boundary[q]:
                if _apply(nxt, col):
                    raise ComplexError("coboundary squared is not zero")
    return {q: cc.dims[q] - ranks.get(q, 0) - ranks.get(q - 1, 0) for q in range(d + 1)}


# ---------------------------------------------------------------------------
# allowable chains


@dataclass
class ICComplex:
    p: int
    structure: str
    chains: ChainComplexQ
    allowed_basis: dict[int, list[dict]]     # spanning vectors of A_q inside C_q
    allowed_annihilator: dict[int, list[dict]]  # rows cutting out A_q
    ic_basis: dict[int, list[dict]]          # basis of IC_q inside C_q

    def is_allowable(self, q: int, chain: dict) -> bool:
        return not any(_dot(r, chain) for r in self.allowed_annihilator.get(q, []))

    def is_intersection_chain(self, q: int, chain: dict) -> bool:
        if not self.is_allowable(q, chain):
            return False
        if q == 0:
            return True
        return self.is_allowable(q - 1, _apply(self.chains.boundary[q], chain))

    def homology_dims(self) -> dict[int, int]:
        out = {}
        ranks = {}
        for q, basis in self.ic_basis.items():
            cols = self.chains.boundary.get(q, [])
            imgs = [_apply(cols, v) for v in basis] if q > 0 else []
            ranks[q] = sparse_rank(imgs) if imgs else 0
        for q, basis in self.ic_basis.items():
            out[q] = len(basis) - ranks[q] - ranks.get(q + 1, 0)
        return out


def _dot(a: dict, b: dict):
    if len(a) > len(b):
        a, b = b, a
    return sum((v * b[k] for k, v in a.items() if k in b), ZERO)


def _allowed_at(x, sys_, carrier: CCell, s: CCell, p: int, q: int, k: int, memo: dict) -> Subspace:
    key = (carrier, s, q, k)
    got = memo.get(key)
    if got is not None:
        return got
    d = x.d
    vecs = []
    for top in sys_.tops(carrier):
        idx = allowed_monomials(d, p, q, k, s.dim, _positions(top, s.tau), _positions(top, s.sigma))
        for i in idx:
            vecs.append(sys_.embed(carrier, top, {i: ONE}))
    sub = Subspace(sys_.space(carrier).dim, vecs)
    memo[key] = sub
    return sub


def ic_complex(x: CompactifiedCellComplex, p: int, structure: str = "barycentric") -> ICComplex:
    key = ("ic", p, structure)
    with x.lock:
        got = x.cache.get(key)
    if got is not None:
        return got
    st, sys_, layouts, cc = _chain_data(x, p, structure)
    d = x.d
    sing = x.singular_cells
    memo: dict = {}
    a_basis: dict[int, list[dict]] = {}
    a_ann: dict[int, list[dict]] = {}
    for q in range(d + 1):
        lay = layouts[q]
        basis: list[dict] = []
        ann: list[dict] = []
        for pc in lay.pieces:
            carrier = st.carrier(pc)
            n = sys_.space(carrier).dim
            if n == 0:
                continue
            subs = []
            for s in sing:
                k = st.meets(pc, s)
                if k is None:
                    continue
                subs.append(_allowed_at(x, sys_, carrier, s, p, q, k, memo))
            a = intersect_all(subs, n)
            off = lay.offsets[pc]
            basis.extend({off + i: v for i, v in vec.items()} for vec in a.sparse_basis())
            ann.extend({off + i: v for i, v in vec.items()} for vec in a.annihilator().sparse_basis())
        a_basis[q] = basis
        a_ann[q] = ann
    ic_basis: dict[int, list[dict]] = {}
    for q in range(d + 1):
        basis = a_basis[q]
        if q == 0 or not basis:
            ic_basis[q] = list(basis)
            continue
        rows_ann = a_ann[q - 1]
        cols = cc.boundary[q]
        # coefficients y with Z_{q-1} . boundary . (A y) = 0
        conds = []
        for v in basis:
            img = _apply(cols, v)
            conds.append({r: val for r, row in enumerate(rows_ann) if (val := _dot(row, img))})
        ker = sparse_kernel(transpose_sparse(conds, len(rows_ann)), len(basis))
        out = []
        for y in ker:
            vec: dict = {}
            for j, c in y.items():
                _add_into(vec, basis[j], c, 0)
            out.append(vec)
        ic_basis[q] = out
    ic = ICComplex(p, structure, cc, a_basis, a_ann, ic_basis)
    with x.lock:
        x.cache[key] = ic
    return ic


def intersection_homology(x: CompactifiedCellComplex, p: int, structure: str = "barycentric") -> dict[int, int]:
    """dim IH_{p,q} for q = 0..d."""
    if p < 0 or p > x.d:
        return {q: 0 for q in range(x.d + 1)}
    return ic_complex(x, p, structure).homology_dims()


# ---------------------------------------------------------------------------
# tables


@dataclass(frozen=True)
class DimensionTable:
    d: int
    entries: tuple[tuple[tuple[int, int], int], ...]

    @classmethod
    def from_dict(cls, d: int, data: dict) -> "DimensionTable":
        full = {(p, q): int(data.get((p, q), 0)) for p in range(d + 1) for q in range(d + 1)}
        return cls(d, tuple(sorted(full.items())))

    def as_dict(self) -> dict[tuple[int, int], int]:
        return dict(self.entries)

    def __getitem__(self, pq: tuple[int, int]) -> int:
        return self.as_dict().get(pq, 0)

    def to_json(self) -> dict[str, int]:
        return {f"{p},{q}": v for (p, q), v in self.entries}

    def diagonal(self) -> list[int]:
        return [self[(p, p)] for p in range(self.d + 1)]

    def off_diagonal_zero(self) -> bool:
        return all(v == 0 for (p, q), v in self.entries if p != q)

    def upper_zero(self) -> bool:
        """Entries with p < q vanish."""
        return all(v == 0 for (p, q), v in self.entries if p < q)

    def first_asymmetry(self) -> tuple[int, int] | None:
        d = self.d
        for (p, q), v in self.entries:
            if v != self[(d - p, d - q)]:
                return (p, q)
        return None

    def first_difference(self, other: "DimensionTable") -> tuple[int, int] | None:
        if self.d != other.d:
            return (-1, -1)
        for (p, q), v in self.entries:
            if v != other[(p, q)]:
                return (p, q)
        return None

    def convolve(self, other: "DimensionTable") -> "DimensionTable":
        out: dict = {}
        for (p1, q1), a in self.entries:
            for (p2, q2), b in other.entries:
                key = (p1 + p2, q1 + q2)
                out[key] = out.get(key, 0) + a * b
        return DimensionTable.from_dict(self.d + other.d, out)

    def pretty(self) -> str:
        d = self.d
        head = "p\\q " + " ".join(f"{q:>4}" for q in range(d + 1))
        lines = [head]
        for p in range(d + 1):
            lines.append(f"{p:>3} " + " ".join(f"{self[(p, q)]:>4}" for q in range(d + 1)))
        return "\n".join(lines)


def ih_table(x: CompactifiedCellComplex, structure: str = "barycentric") -> DimensionTable:
    """Cohomological labels: entry (d-p, d-q) is dim IH_{p,q}."""
    d = x.d
    rows = pmap(lambda p: (p, intersection_homology(x, p, structure)), range(d + 1))
    data = {}
    for p, dims in rows:
        for q, v in dims.items():
            data[(d - p, d - q)] = v
    return DimensionTable.from_dict(d, data)


def hcoh_table(x: CompactifiedCellComplex, structure: str = "native") -> DimensionTable:
    d = x.d
    rows = pmap(lambda p: (p, tropical_cohomology(x, p, structure)), range(d + 1))
    data = {(p, q): v for p, dims in rows for q, v in dims.items()}
    return DimensionTable.from_dict(d, data)


def homology_table(x: CompactifiedCellComplex, structure: str = "native") -> DimensionTable:
    """Plain tropical homology with F_{p,w} coefficients, entry (p, q) = dim H_{p,q}."""
    d = x.d
    data = {}
    for p in range(d + 1):
        for q, v in tropical_homology(x, p, structure).items():
            data[(p, q)] = v
    return DimensionTable.from_dict(d, data)


# ---------------------------------------------------------------------------
# fundamental class


@dataclass
class FundamentalClass:
    structure: str
    chain: dict                 # sparse vector in C_{d,d}
    closed: bool
    allowable: bool


def fundamental_class(x: CompactifiedCellComplex, structure: str = "native") -> FundamentalClass:
    d = x.d
    st, sys_, layouts, cc = _chain_data(x, d, structure)
    chain: dict = {}
    lay = layouts[d]
    for pc in lay.pieces:
        carrier = st.carrier(pc)
        if carrier.tau or len(carrier.sigma) != d:
            continue
        w = x.cycle.w(carrier.sigma)
        # F(P) is the top exterior power, basis vector = wedge of P's rays in order
        chain[lay.offsets[pc]] = Fraction(w * st.top_sign(pc))
    bd = _apply(cc.boundary[d], chain) if d > 0 else {}
    ic = ic_complex(x, d, structure)
    return FundamentalClass(structure, chain, not bd, ic.is_intersection_chain(d, chain))


# ---------------------------------------------------------------------------
# checks


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    details: str

    def to_json(self) -> dict:
        return {"name": self.name, "status": "pass" if self.passed else "fail", "details": self.details}


def verify_duality(x: CompactifiedCellComplex, structure: str = "barycentric") -> CheckResult:
    t = ih_table(x, structure)
    bad = t.first_asymmetry()
    if bad is None:
        return CheckResult("duality", True, "IH table is symmetric under (p,q) -> (d-p,d-q)")
    p, q = bad
    d = x.d
    return CheckResult("duality", False, f"IH^{{{p},{q}}} = {t[bad]} but IH^{{{d - p},{d - q}}} = {t[(d - p, d - q)]}")


def verify_subdivision(x: CompactifiedCellComplex) -> CheckResult:
    a = ih_table(x, "native")
    b = ih_table(x, "barycentric")
    bad = a.first_difference(b)
    if bad is None:
        return CheckResult("subdivision", True, "native and barycentric IH tables agree")
    return CheckResult("subdivision", False,
                       f"at (p,q) = {bad}: native {a[bad]}, barycentric {b[bad]}")


def verify_kunneth(x: CompactifiedCellComplex, y: CompactifiedCellComplex, xy: CompactifiedCellComplex,
                   structure: str = "barycentric") -> CheckResult:
    expect = ih_table(x, structure).convolve(ih_table(y, structure))
    got = ih_table(xy, structure)
    bad = got.first_difference(expect)
    if bad is None:
        return CheckResult("kunneth", True, "product table equals the convolution of the factor tables")
    return CheckResult("kunneth", False, f"at (p,q) = {bad}: product {got[bad]}, convolution {expect[bad]}")


def verify_theorem61(x: CompactifiedCellComplex, structure: str = "barycentric") -> CheckResult:
    from .chow import predicted_ih

    got = ih_table(x, structure)
    want = predicted_ih(x.cycle.fan, x.cycle)
    bad = got.first_difference(want)
    if bad is None:
        return CheckResult("theorem61", True,
                           f"IH^(p,p) = dim CH^p/Num^p = {want.diagonal()} and off-diagonal IH vanishes")
    return CheckResult("theorem61", False, f"at (p,q) = {bad}: IH {got[bad]}, CH/Num prediction {want[bad]}")
