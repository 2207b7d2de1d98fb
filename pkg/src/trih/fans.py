"""Unimodular simplicial fans and weighted fan cycles.

Cones are frozensets of ray indices.  Because every cone is simplicial, every
subset of a cone's rays spans a face, so the face closure of the maximal cones
is just the collection of all their subsets.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .qlinalg import (
    QMat,
    content,
    integer_kernel,
    is_unimodular,
    primitive_vector,
    solve,
    sparse_kernel,
)

Cone = frozenset


class FanError(ValueError):
    """Raised for input that does not describe a valid fan or cycle."""


def cone_key(c: Iterable[int]) -> tuple:
    t = tuple(sorted(c))
    return (len(t), t)


@dataclass(frozen=True)
class Fan:
    rank: int
    rays: tuple[tuple[int, ...], ...]
    cones: tuple[Cone, ...]
    maximal_cones: tuple[int, ...]

    @cached_property
    def _index(self) -> dict:
        return {c: i for i, c in enumerate(self.cones)}

    @cached_property
    def cache(self) -> dict:
        return {}

    def cone_id(self, cone: Iterable[int]) -> int:
        c = frozenset(cone)
        try:
            return self._index[c]
        except KeyError:
            raise FanError(f"{sorted(c)} is not a cone of the fan") from None

    def has_cone(self, cone: Iterable[int]) -> bool:
        return frozenset(cone) in self._index

    @property
    def dim(self) -> int:
        return max((len(self.cones[i]) for i in self.maximal_cones), default=0)

    def cones_of_dim(self, k: int) -> list[Cone]:
        return [c for c in self.cones if len(c) == k]

    @property
    def maximal(self) -> list[Cone]:
        return [self.cones[i] for i in self.maximal_cones]

    def is_pure(self) -> bool:
        return len({len(c) for c in self.maximal}) <= 1

    def cones_containing(self, cone: Iterable[int]) -> list[Cone]:
        c = frozenset(cone)
        return [d for d in self.cones if c <= d]

    def ray_matrix(self, cone: Iterable[int]) -> list[tuple[int, ...]]:
        return [self.rays[i] for i in sorted(cone)]

    def is_complete(self) -> bool:
        """Pure of full dimension with every wall shared by exactly two chambers."""
        n = self.rank
        if not self.is_pure() or self.dim != n:
            return False
        if n == 0:
            return True
        walls: dict[Cone, int] = {}
        for c in self.maximal:
            for r in c:
                w = c - {r}
                walls[w] = walls.get(w, 0) + 1
        return all(v == 2 for v in walls.values())


def build_fan(rank: int, rays: Sequence[Sequence[int]], maximal_cones: Iterable[Iterable[int]],
              geometric: bool = False) -> Fan:
    """Validate rays and maximal cones and return the face-closed fan."""
    rays = tuple(tuple(int(x) for x in r) for r in rays)
    for i, r in enumerate(rays):
        if len(r) != rank:
            raise FanError(f"ray {i} has length {len(r)}, expected {rank}")
        if content(r) == 0:
            raise FanError(f"ray {i} is zero")
        if content(r) != 1:
            raise FanError(f"ray {i} = {list(r)} is not primitive")
    if len(set(rays)) != len(rays):
        raise FanError("rays are not distinct")
    given = []
    for c in maximal_cones:
        c = frozenset(int(i) for i in c)
        for i in c:
            if not 0 <= i < len(rays):
                raise FanError(f"cone {sorted(c)} refers to a missing ray {i}")
        given.append(c)
    if not given:
        given = [frozenset()]
    maxes = []
    for c in given:
        if any(c < d for d in given) or c in maxes:
            continue
        if c and not is_unimodular([rays[i] for i in sorted(c)]):
            raise FanError(f"cone {sorted(c)} is not unimodular")
        maxes.append(c)
    used = set().union(*maxes)
    if len(used) != len(rays):
        missing = sorted(set(range(len(rays))) - used)
        raise FanError(f"rays {missing} are not contained in any cone")
    faces = set()
    for c in maxes:
        items = sorted(c)
        for mask in range(1 << len(items)):
            faces.add(frozenset(items[j] for j in range(len(items)) if mask >> j & 1))
    cones = tuple(sorted(faces, key=cone_key))
    index = {c: i for i, c in enumerate(cones)}
    for a in maxes:
        for b in maxes:
            if a & b not in index:
                raise FanError(f"intersection of {sorted(a)} and {sorted(b)} is not a cone")
    if geometric:
        for ia, a in enumerate(maxes):
            for b in maxes[ia + 1:]:
                if not _cones_meet_properly(rays, a, b):
                    raise FanError(f"cones {sorted(a)} and {sorted(b)} overlap beyond their common face")
    maximal = tuple(sorted(index[c] for c in maxes))
    return Fan(rank, rays, cones, maximal)


# ---------------------------------------------------------------------------
# exact feasibility by Fourier-Motzkin elimination


def _nonneg_feasible(eq: list[list[Fraction]], rhs: list[Fraction], nvars: int, nonneg: Sequence[int]) -> bool:
    """Is there x with eq . x = rhs and x_i >= 0 for i in nonneg?"""
    m = QMat(eq, nvars) if eq else QMat((), nvars)
    x0 = solve(m, rhs) if eq else [Fraction(0)] * nvars
    if x0 is None:
        return False
    kern = sparse_kernel(m.sparse_rows(), nvars)
    t = len(kern)
    # inequalities: const + sum coef_k t_k >= 0
    ineqs = []
    for i in nonneg:
        coefs = [k.get(i, Fraction(0)) for k in kern]
        ineqs.append((coefs, x0[i]))
    for var in range(t):
        pos, neg, rest = [], [], []
        for coefs, c in ineqs:
            a = coefs[var]
            (pos if a > 0 else neg if a < 0 else rest).append((coefs, c))
        new = list(rest)
        for cp, kp in pos:
            for cn, kn in neg:
                ap, an = cp[var], -cn[var]
                new.append(([an * x + ap * y for x, y in zip(cp, cn)], an * kp + ap * kn))
        ineqs = new
    return all(c >= 0 for _, c in ineqs)


def _cones_meet_properly(rays, a: Cone, b: Cone) -> bool:
    only_a = sorted(a - b)
    only_b = sorted(b - a)
    both = sorted(a & b)
    if not only_a and not only_b:
        return True
    cols = [rays[i] for i in only_a] + [tuple(-x for x in rays[j]) for j in only_b] + [rays[k] for k in both]
    nvars = len(cols)
    n = len(rays[0]) if rays else 0
    eq = [[Fraction(cols[v][row]) for v in range(nvars)] for row in range(n)]
    rhs = [Fraction(0)] * n
    k = len(only_a) + len(only_b)
    eq.append([Fraction(1)] * k + [Fraction(0)] * len(both))
    rhs.append(Fraction(1))
    return not _nonneg_feasible(eq, rhs, nvars, range(k))


def in_support(fan: Fan, point: Sequence) -> bool:
    """Does a rational point lie in the support of the fan?"""
    pt = [Fraction(x) for x in point]
    if not any(pt):
        return True
    for c in fan.maximal:
        coeffs = _coords_in_cone(fan, c, pt)
        if coeffs is not None and all(x >= 0 for x in coeffs):
            return True
    return False


def _coords_in_cone(fan: Fan, cone: Cone, pt: Sequence[Fraction]) -> list[Fraction] | None:
    idx = sorted(cone)
    if not idx:
        return [] if not any(pt) else None
    m = QMat([[fan.rays[i][row] for i in idx] for row in range(fan.rank)], len(idx))
    x = solve(m, pt)
    if x is None:
        return None
    return x


# ---------------------------------------------------------------------------
# weighted cycles


@dataclass(frozen=True)
class MinkowskiWeight:
    fan: Fan
    k: int
    weight_items: tuple[tuple[Cone, int], ...]

    @classmethod
    def create(cls, fan: Fan, k: int, weights: Mapping) -> "MinkowskiWeight":
        items = []
        for c, w in weights.items():
            c = frozenset(c)
            if len(c) != k or not fan.has_cone(c):
                raise FanError(f"{sorted(c)} is not a {k}-cone of the fan")
            items.append((c, int(w)))
        return cls(fan, k, tuple(sorted(items, key=lambda cw: cone_key(cw[0]))))

    @property
    def weights(self) -> dict:
        return dict(self.weight_items)

    def w(self, cone: Iterable[int]) -> int:
        return self.weights.get(frozenset(cone), 0)


@dataclass(frozen=True)
class TropicalFanCycle:
    fan: Fan
    weight_items: tuple[tuple[Cone, int], ...]

    @property
    def weights(self) -> dict:
        return dict(self.weight_items)

    def w(self, cone: Iterable[int]) -> int:
        return self.weights.get(frozenset(cone), 0)

    @property
    def d(self) -> int:
        return self.fan.dim

    @property
    def top_cones(self) -> list[Cone]:
        return [c for c, _ in self.weight_items]

    def as_minkowski_weight(self) -> MinkowskiWeight:
        return MinkowskiWeight(self.fan, self.d, self.weight_items)


def make_cycle(fan: Fan, weights: Mapping, check_balanced: bool = True) -> TropicalFanCycle:
    if not fan.is_pure():
        raise FanError("fan is not pure dimensional")
    d = fan.dim
    items = {}
    for c, w in weights.items():
        c = frozenset(c)
        if not fan.has_cone(c) or len(c) != d:
            raise FanError(f"weight given on {sorted(c)}, which is not a maximal cone")
        if int(w) != w or int(w) < 1:
            raise FanError(f"weight of {sorted(c)} must be a positive integer")
        items[c] = int(w)
    for c in fan.maximal:
        if c not in items:
            raise FanError(f"maximal cone {sorted(c)} has no weight")
    cyc = TropicalFanCycle(fan, tuple(sorted(items.items(), key=lambda cw: cone_key(cw[0]))))
    if check_balanced:
        ok, bad = is_balanced(cyc)
        if not ok:
            raise FanError(f"not balanced at cones {[sorted(c) for c in bad]}")
    return cyc


def balancing_sum(fan: Fan, k: int, weights: Mapping, q: Cone) -> tuple[int, ...]:
    """sum over k-cones P containing the (k-1)-cone q of w_P times the extra ray of P."""
    total = [0] * fan.rank
    for p, w in weights.items():
        if len(p) == k and q < p and w:
            (r,) = tuple(p - q)
            for i, x in enumerate(fan.rays[r]):
                total[i] += w * x
    return tuple(total)


def lattice_coordinates(fan: Fan, cone: Cone, v: Sequence) -> list[Fraction] | None:
    """Coordinates of v in the rays of a cone, or None if v is not in its span."""
    pt = [Fraction(x) for x in v]
    return _coords_in_cone(fan, cone, pt)


def is_balanced(c: MinkowskiWeight | TropicalFanCycle) -> tuple[bool, list[Cone]]:
    if isinstance(c, TropicalFanCycle):
        fan, k, weights = c.fan, c.d, c.weights
    else:
        fan, k, weights = c.fan, c.k, c.weights
    bad = []
    if k == 0:
        return True, bad
    for q in fan.cones_of_dim(k - 1):
        s = balancing_sum(fan, k, weights, q)
        coords = lattice_coordinates(fan, q, s)
        if coords is None or any(x.denominator != 1 for x in coords):
            bad.append(q)
    return not bad, bad


# ---------------------------------------------------------------------------
# derived fans and cycles


def quotient_map(fan: Fan, cone: Iterable[int]) -> list[tuple[int, ...]]:
    """A lattice basis of the dual lattice perpendicular to a cone.

    Pairing with these vectors identifies N / (N cap span cone) with Z^k.
    """
    rows = fan.ray_matrix(cone)
    return integer_kernel(rows, fan.rank)


def _project(basis, v) -> tuple[int, ...]:
    return tuple(sum(a * b for a, b in zip(m, v)) for m in basis)


def star_fan_with_map(fan: Fan, cone: Iterable[int]) -> tuple[Fan, dict]:
    sigma = frozenset(cone)
    fan.cone_id(sigma)
    basis = quotient_map(fan, sigma)
    above = fan.cones_containing(sigma)
    new_rays = sorted({r for c in above for r in c - sigma})
    ray_map = {r: i for i, r in enumerate(new_rays)}
    rays = [primitive_vector(_project(basis, fan.rays[r])) for r in new_rays]
    maxes = [frozenset(ray_map[r] for r in c - sigma) for c in above
             if not any(c < d for d in above)]
    return build_fan(len(basis), rays, maxes), ray_map


def star_fan(fan: Fan, cone: Iterable[int]) -> Fan:
    return star_fan_with_map(fan, cone)[0]


def restrict_to_stratum(c: TropicalFanCycle, cone: Iterable[int]) -> TropicalFanCycle:
    sigma = frozenset(cone)
    star, ray_map = star_fan_with_map(c.fan, sigma)
    weights = {}
    for p, w in c.weight_items:
        if sigma <= p:
            weights[frozenset(ray_map[r] for r in p - sigma)] = w
    return make_cycle(star, weights, check_balanced=False)


def product(c1: TropicalFanCycle, c2: TropicalFanCycle) -> TropicalFanCycle:
    f1, f2 = c1.fan, c2.fan
    n1, n2 = f1.rank, f2.rank
    rays = [r + (0,) * n2 for r in f1.rays] + [(0,) * n1 + r for r in f2.rays]
    off = len(f1.rays)
    weights = {}
    for a, wa in c1.weight_items:
        for b, wb in c2.weight_items:
            weights[a | frozenset(off + j for j in b)] = wa * wb
    fan = build_fan(n1 + n2, rays, list(weights))
    return make_cycle(fan, weights, check_balanced=False)


def point_cycle() -> TropicalFanCycle:
    fan = build_fan(0, [], [[]])
    return make_cycle(fan, {frozenset(): 1})


def stellar_subdivision(c: TropicalFanCycle, new_ray: Sequence[int]) -> TropicalFanCycle:
    fan = c.fan
    v = tuple(int(x) for x in new_ray)
    if len(v) != fan.rank:
        raise FanError("new ray has the wrong length")
    if content(v) != 1:
        raise FanError("new ray is not primitive")
    if v in fan.rays:
        return c
    carrier = None
    for cone in fan.cones:
        if not cone:
            continue
        coords = lattice_coordinates(fan, cone, v)
        if coords is not None and all(x > 0 for x in coords):
            carrier = cone
            break
    if carrier is None:
        raise FanError("new ray does not lie in the support of the fan")
    new = len(fan.rays)
    weights = {}
    for p, w in c.weight_items:
        if carrier <= p:
            for r in carrier:
                weights[(p - {r}) | {new}] = w
        else:
            weights[p] = w
    others = [m for m in fan.maximal if m not in c.weights]
    pieces = list(weights) + others
    nf = build_fan(fan.rank, list(fan.rays) + [v], pieces)
    return make_cycle(nf, weights, check_balanced=False)
