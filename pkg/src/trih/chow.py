"""Rational Chow groups of smooth toric varieties from their fans.

CH^p is presented by the classes [V(sigma)] of p-cones modulo the relations
sum_{sigma > tau} <m, u_{sigma/tau}> [V(sigma)] = 0 for (p-1)-cones tau and
m in M orthogonal to tau.  Products are computed by multiplying with toric
divisors one ray at a time.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Mapping

from .fans import Cone, Fan, MinkowskiWeight, TropicalFanCycle, cone_key, is_balanced
from .ihomology import DimensionTable
from .parallel import pmap
from .qlinalg import (
    ZERO,
    QMat,
    QuotientSpace,
    Subspace,
    integer_kernel,
    rank,
    solve,
)


class ChowError(ValueError):
    pass


Class = dict  # cone -> Fraction, a combination of generators [V(sigma)]


def _pairing(m, u) -> int:
    return sum(a * b for a, b in zip(m, u))


def perp_lattice(fan: Fan, tau: Cone) -> list[tuple[int, ...]]:
    """Lattice basis of M cap tau^perp."""
    if not tau:
        n = fan.rank
        return [tuple(1 if i == j else 0 for i in range(n)) for j in range(n)]
    return integer_kernel(fan.ray_matrix(tau), fan.rank)


@dataclass(frozen=True)
class ChowPresentation:
    fan: Fan
    p: int
    generators: tuple[Cone, ...]
    relations: tuple[dict, ...]   # sparse rows over generator positions
    quotient: QuotientSpace

    @property
    def dim(self) -> int:
        return self.quotient.dim

    def position(self, cone: Cone) -> int:
        return self.generators.index(frozenset(cone))

    def vector(self, c: Class) -> dict:
        idx = {g: i for i, g in enumerate(self.generators)}
        out = {}
        for cone, v in c.items():
            if v:
                if cone not in idx:
                    raise ChowError(f"{sorted(cone)} is not a {self.p}-cone")
                out[idx[cone]] = Fraction(v)
        return out

    def reduce(self, c: Class) -> dict:
        """Coordinates of a class in the quotient basis."""
        return self.quotient.project_sparse(self.vector(c))

    def equal(self, a: Class, b: Class) -> bool:
        diff = dict(a)
        for k, v in b.items():
            diff[k] = diff.get(k, ZERO) - v
        return not self.reduce(diff)

    def basis_classes(self) -> list[Class]:
        return [
            {self.generators[j]: v for j, v in self.quotient.lift_basis(i).items()}
            for i in range(self.dim)
        ]


def relation_rows(fan: Fan, p: int) -> list[dict]:
    gens = fan.cones_of_dim(p)
    idx = {g: i for i, g in enumerate(gens)}
    rows = []
    if p == 0:
        return rows
    for tau in fan.cones_of_dim(p - 1):
        over = [s for s in gens if tau < s]
        for m in perp_lattice(fan, tau):
            row = {}
            for s in over:
                (r,) = tuple(s - tau)
                v = _pairing(m, fan.rays[r])
                if v:
                    row[idx[s]] = Fraction(v)
            if row:
                rows.append(row)
    return rows


def ch_group(fan: Fan, p: int) -> ChowPresentation:
    key = ("ch", p)
    got = fan.cache.get(key)
    if got is not None:
        return got
    gens = tuple(fan.cones_of_dim(p)) if 0 <= p <= fan.rank else ()
    rows = relation_rows(fan, p) if gens else []
    q = QuotientSpace.of_full(len(gens), rows)
    pres = ChowPresentation(fan, p, gens, tuple(rows), q)
    fan.cache[key] = pres
    return pres


def rewriting_form(fan: Fan, ray: int, cone: Cone, shift: int = 0) -> list[Fraction]:
    """m in M_Q with <m, u_ray> = 1 and <m, u> = 0 on the other rays of cone.

    ``shift`` moves along cone^perp to give alternative valid choices."""
    rows = fan.ray_matrix(cone)
    order = sorted(cone)
    rhs = [1 if r == ray else 0 for r in order]
    m = solve(QMat(rows, fan.rank), rhs)
    if m is None:
        raise ChowError(f"no rewriting form for ray {ray} on {sorted(cone)}")
    if shift:
        for k in perp_lattice(fan, cone):
            m = [a + shift * b for a, b in zip(m, k)]
    return m


def multiply_by_divisor(fan: Fan, ray: int, c: Class, shift: int = 0) -> Class:
    """D_ray . c, where c is a combination of [V(sigma)] over k-cones."""
    out: dict = {}

    def add(cone, v):
        nv = out.get(cone, ZERO) + v
        if nv:
            out[cone] = nv
        else:
            out.pop(cone, None)

    for sigma, coef in c.items():
        if not coef:
            continue
        coef = Fraction(coef)
        if ray not in sigma:
            bigger = sigma | {ray}
            if fan.has_cone(bigger):
                add(bigger, coef)
            continue
        m = rewriting_form(fan, ray, sigma, shift)
        for r, u in enumerate(fan.rays):
            if r in sigma:
                continue
            a = sum(x * y for x, y in zip(m, u))
            if a:
                bigger = sigma | {r}
                if fan.has_cone(bigger):
                    add(bigger, -a * coef)
    return out


def product(fan: Fan, a: Class, b: Class, shift: int = 0) -> Class:
    """a . b, writing each generator of a as the product of its ray divisors."""
    out: dict = {}
    for sigma, coef in a.items():
        if not coef:
            continue
        cur = {cone: coef * v for cone, v in b.items() if v}
        for r in sorted(sigma):
            cur = multiply_by_divisor(fan, r, cur, shift)
        for cone, v in cur.items():
            nv = out.get(cone, ZERO) + v
            if nv:
                out[cone] = nv
            else:
                out.pop(cone, None)
    return out


def annihilates_relations(fan: Fan, k: int, weights: Mapping) -> bool:
    """True when the weight vanishes on every relation of CH^k."""
    pres = ch_group(fan, k)
    w = [Fraction(weights.get(g, 0)) for g in pres.generators]
    return all(sum((v * w[j] for j, v in row.items()), ZERO) == 0 for row in pres.relations)


def _as_weight(w) -> MinkowskiWeight:
    if isinstance(w, TropicalFanCycle):
        return w.as_minkowski_weight()
    return w


def evaluate(w: MinkowskiWeight | TropicalFanCycle, c: Class) -> Fraction:
    mw = _as_weight(w)
    ok, bad = is_balanced(mw)
    if not ok:
        raise ChowError(f"weight is not balanced at {[sorted(b) for b in bad]}")
    weights = mw.weights
    total = ZERO
    for cone, v in c.items():
        if len(cone) != mw.k:
            raise ChowError(f"class has a term of degree {len(cone)}, expected {mw.k}")
        total += Fraction(v) * weights.get(cone, 0)
    return total


@dataclass(frozen=True)
class PairingData:
    p: int
    left: tuple[Class, ...]
    right: tuple[Class, ...]
    matrix: QMat
    ch_dim: int
    rank: int

    @property
    def num_dim(self) -> int:
        return self.ch_dim - self.rank

    @property
    def quotient_dim(self) -> int:
        return self.rank

    def left_radical(self) -> Subspace:
        """Num^p in coordinates of the CH^p basis."""
        m = self.matrix
        rows = [{i: m[(i, j)] for i in range(m.rows) if m[(i, j)]} for j in range(m.cols)]
        return Subspace(m.rows, rows).annihilator()

    def right_radical(self) -> Subspace:
        m = self.matrix
        return Subspace(m.cols, m.sparse_rows()).annihilator()

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "ch_dim": self.ch_dim,
            "rank": self.rank,
            "num_dim": self.num_dim,
            "matrix": [[str(x) for x in row] for row in self.matrix.to_lists()],
        }


def pairing_and_num(fan: Fan, w: TropicalFanCycle | MinkowskiWeight, p: int) -> PairingData:
    mw = _as_weight(w)
    d = mw.k
    left = ch_group(fan, p).basis_classes()
    right = ch_group(fan, d - p).basis_classes()
    if not left or not right:
        return PairingData(p, tuple(left), tuple(right), QMat([], len(right)), len(left), 0)

    def row(a):
        return [evaluate(mw, product(fan, a, b)) for b in right]

    mat = QMat(pmap(row, left), len(right))
    return PairingData(p, tuple(left), tuple(right), mat, len(left), rank(mat))


def predicted_ih(fan: Fan, w: TropicalFanCycle | MinkowskiWeight) -> DimensionTable:
    mw = _as_weight(w)
    d = mw.k
    return DimensionTable.from_dict(d, {(p, p): pairing_and_num(fan, mw, p).rank for p in range(d + 1)})


def chow_dims(fan: Fan, top: int | None = None) -> list[int]:
    top = fan.rank if top is None else top
    return [ch_group(fan, p).dim for p in range(top + 1)]


def singular_betti(fan: Fan) -> list[int]:
    """Even Betti numbers b_0, b_2, ..., b_2n of the complete toric variety.

    Odd Betti numbers vanish.  Computed from the h-vector of the fan."""
    if not fan.is_complete():
        raise ChowError("fan is not complete")
    n = fan.rank
    f = [len(fan.cones_of_dim(j)) for j in range(n + 1)]
    return [sum((-1) ** (i - k) * comb(i, k) * f[n - i] for i in range(k, n + 1)) for k in range(n + 1)]


def sorted_class(c: Class) -> list[tuple[list[int], str]]:
    return [(sorted(k), str(v)) for k, v in sorted(c.items(), key=lambda kv: cone_key(kv[0]))]


__all__ = [
    "ChowError",
    "ChowPresentation",
    "PairingData",
    "annihilates_relations",
    "ch_group",
    "chow_dims",
    "evaluate",
    "multiply_by_divisor",
    "pairing_and_num",
    "perp_lattice",
    "predicted_ih",
    "product",
    "relation_rows",
    "rewriting_form",
    "singular_betti",
]
