"""The canonical compactification of a fan cycle as a cubical cell complex.

A cell is a pair (tau, sigma) of cones with tau a face of sigma.  Its closure
is a cube whose coordinates are the free rays sigma - tau; sending a free ray
to 0 drops it from sigma and sending it to infinity adds it to tau.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Iterable

from .fans import Cone, TropicalFanCycle, cone_key, product
from .qlinalg import QMat, det


@dataclass(frozen=True, order=False)
class CCell:
    tau: Cone
    sigma: Cone

    @property
    def dim(self) -> int:
        return len(self.sigma) - len(self.tau)

    @property
    def free_rays(self) -> tuple[int, ...]:
        return tuple(sorted(self.sigma - self.tau))

    @property
    def sedentarity(self) -> int:
        return len(self.tau)

    def is_face_of(self, other: "CCell") -> bool:
        return other.tau <= self.tau and self.sigma <= other.sigma and self.tau <= self.sigma

    def key(self) -> tuple:
        return (self.dim, cone_key(self.sigma), cone_key(self.tau))

    def __repr__(self) -> str:
        return f"C({sorted(self.tau)},{sorted(self.sigma)})"


def _subsets(s: Iterable[int]):
    items = sorted(s)
    for k in range(len(items) + 1):
        for c in combinations(items, k):
            yield frozenset(c)


@dataclass(frozen=True)
class CompactifiedCellComplex:
    cycle: TropicalFanCycle
    cells: tuple[CCell, ...]

    @cached_property
    def index(self) -> dict:
        return {c: i for i, c in enumerate(self.cells)}

    @cached_property
    def cache(self) -> dict:
        # memo table for coefficient systems built on this complex
        return {}

    @cached_property
    def lock(self) -> threading.RLock:
        return threading.RLock()

    @property
    def d(self) -> int:
        return self.cycle.d

    def cells_of_dim(self, k: int) -> list[CCell]:
        return [c for c in self.cells if c.dim == k]

    def faces(self, cell: CCell) -> list[CCell]:
        """All cells in the closure of ``cell`` (including itself)."""
        out = []
        free = cell.sigma - cell.tau
        for extra in _subsets(free):
            for keep in _subsets(free - extra):
                c = CCell(cell.tau | extra, cell.tau | extra | keep)
                if c in self.index:
                    out.append(c)
        return out

    def boundary(self, cell: CCell) -> list[tuple[CCell, int]]:
        """Signed codimension-one faces: sum_i (-1)^i (infinity face - zero face)."""
        out = []
        for i, r in enumerate(cell.free_rays):
            s = -1 if i % 2 else 1
            inf_face = CCell(cell.tau | {r}, cell.sigma)
            zero_face = CCell(cell.tau, cell.sigma - {r})
            if inf_face in self.index:
                out.append((inf_face, s))
            if zero_face in self.index:
                out.append((zero_face, -s))
        return out

    def is_smooth(self, cell: CCell) -> bool:
        return not cell.tau and cell.dim >= self.d - 1

    @property
    def smooth_cells(self) -> list[CCell]:
        return [c for c in self.cells if self.is_smooth(c)]

    @property
    def singular_cells(self) -> list[CCell]:
        return [c for c in self.cells if not self.is_smooth(c)]

    @cached_property
    def top_cells(self) -> tuple[CCell, ...]:
        return tuple(CCell(frozenset(), p) for p in self.cycle.top_cones)

    def tops_over(self, cell: CCell) -> list[CCell]:
        """Top-dimensional cells of sedentarity zero whose closure contains ``cell``."""
        return [t for t in self.top_cells if cell.sigma <= t.sigma]

    def weight(self, cell: CCell) -> int:
        if len(cell.sigma) == self.d:
            return self.cycle.w(cell.sigma)
        return 0

    def f_vector(self) -> list[int]:
        out = [0] * (self.d + 1)
        for c in self.cells:
            out[c.dim] += 1
        return out

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * n for k, n in enumerate(self.f_vector()))

    def tangent_dim(self, cell: CCell) -> int:
        """Dimension of the image of span(sigma) in N / span(tau)."""
        fan = self.cycle.fan
        rows = fan.ray_matrix(cell.sigma)
        sub = fan.ray_matrix(cell.tau)
        return _rank_int(rows) - _rank_int(sub)


def _rank_int(rows) -> int:
    from .qlinalg import rank
    if not rows:
        return 0
    return rank(QMat(rows))


def canonical_compactification(c: TropicalFanCycle) -> CompactifiedCellComplex:
    cells = set()
    for sigma in c.fan.cones:
        for tau in _subsets(sigma):
            cells.add(CCell(tau, sigma))
    return CompactifiedCellComplex(c, tuple(sorted(cells, key=CCell.key)))


def is_regular_at_infinity(x: CompactifiedCellComplex) -> bool:
    """Every closed top cell is a full cube, and every cell at infinity sits
    inside such a cube with codimension equal to its sedentarity."""
    d = x.d
    idx = x.index
    for t in x.top_cells:
        if t not in idx:
            return False
        for tau in _subsets(t.sigma):
            if CCell(tau, t.sigma) not in idx:
                return False
    for c in x.cells:
        if not c.tau:
            continue
        if not any(c.sigma <= t.sigma and t.dim - c.dim >= len(c.tau) for t in x.top_cells):
            return False
        if x.tangent_dim(c) != c.dim:
            return False
    return all(len(t.sigma) == d for t in x.top_cells)


def product_complex(x1: CompactifiedCellComplex, x2: CompactifiedCellComplex) -> CompactifiedCellComplex:
    off = len(x1.cycle.fan.rays)
    cells = []
    for a in x1.cells:
        for b in x2.cells:
            shift_t = frozenset(off + j for j in b.tau)
            shift_s = frozenset(off + j for j in b.sigma)
            cells.append(CCell(a.tau | shift_t, a.sigma | shift_s))
    cyc = product(x1.cycle, x2.cycle)
    return CompactifiedCellComplex(cyc, tuple(sorted(cells, key=CCell.key)))


# ---------------------------------------------------------------------------
# barycentric subdivision


@dataclass(frozen=True)
class Subdivision:
    """Order complex of the face poset.  A simplex is an increasing chain of
    cell indices; its carrier is the last (largest) cell."""

    complex: CompactifiedCellComplex
    simplices: tuple[tuple[int, ...], ...]

    @cached_property
    def index(self) -> dict:
        return {s: i for i, s in enumerate(self.simplices)}

    def simplices_of_dim(self, q: int) -> list[tuple[int, ...]]:
        return [s for s in self.simplices if len(s) == q + 1]

    def carrier(self, simplex: tuple[int, ...]) -> CCell:
        return self.complex.cells[simplex[-1]]

    def boundary(self, simplex: tuple[int, ...]) -> list[tuple[tuple[int, ...], int]]:
        if len(simplex) == 1:
            return []
        return [(simplex[:i] + simplex[i + 1:], -1 if i % 2 else 1) for i in range(len(simplex))]

    def stratum_position(self, simplex: tuple[int, ...], cell: CCell) -> int | None:
        """Dimension of the part of the simplex inside the open cell, if any."""
        j = self.complex.index.get(cell)
        if j is None:
            return None
        try:
            return simplex.index(j)
        except ValueError:
            return None

    def f_vector(self) -> list[int]:
        top = max((len(s) for s in self.simplices), default=0)
        out = [0] * top
        for s in self.simplices:
            out[len(s) - 1] += 1
        return out

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * n for k, n in enumerate(self.f_vector()))

    def orientation_sign(self, simplex: tuple[int, ...]) -> int:
        """Sign of a top simplex relative to the cube orientation of its carrier."""
        cells = [self.complex.cells[i] for i in simplex]
        top = cells[-1]
        free = top.free_rays
        pts = [_barycenter(c, top, free) for c in cells]
        base = pts[0]
        m = QMat([[p[j] - base[j] for p in pts[1:]] for j in range(len(free))], len(free))
        s = det(m) if free else Fraction(1)
        return 1 if s > 0 else -1


def _barycenter(cell: CCell, top: CCell, free: tuple[int, ...]) -> list[Fraction]:
    # cube coordinates in [0, 1]: 1 means the free ray is sent to infinity
    out = []
    for r in free:
        if r in cell.tau:
            out.append(Fraction(1))
        elif r in cell.sigma:
            out.append(Fraction(1, 2))
        else:
            out.append(Fraction(0))
    return out


def barycentric_subdivision(x: CompactifiedCellComplex) -> Subdivision:
    cells = x.cells
    idx = x.index
    below: dict[int, list[int]] = {}
    for i, c in enumerate(cells):
        below[i] = sorted(idx[f] for f in x.faces(c) if f != c)
    chains: set[tuple[int, ...]] = set()
    memo: dict[int, list[tuple[int, ...]]] = {}

    def chains_ending(i: int) -> list[tuple[int, ...]]:
        if i in memo:
            return memo[i]
        out = [(i,)]
        for j in below[i]:
            out.extend(ch + (i,) for ch in chains_ending(j))
        memo[i] = out
        return out

    for i in range(len(cells)):
        chains.update(chains_ending(i))
    ordered = sorted(chains, key=lambda s: (len(s), s))
    return Subdivision(x, tuple(ordered))
