"""Exterior powers in a fixed basis.

An element of the p-th exterior power of an n-dimensional space is a dict
from strictly increasing index tuples (monomials) to Fractions.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Sequence

from .qlinalg import ZERO, QMat, det


@lru_cache(maxsize=None)
def monomials(n: int, p: int) -> tuple[tuple[int, ...], ...]:
    if p < 0 or p > n:
        return ()
    return tuple(combinations(range(n), p))


@lru_cache(maxsize=None)
def monomial_index(n: int, p: int) -> dict:
    return {m: i for i, m in enumerate(monomials(n, p))}


def merge_sign(a: Sequence[int], b: Sequence[int]) -> int:
    """Sign of the shuffle sorting the concatenation a + b (disjoint, each sorted)."""
    inv = 0
    for x in a:
        for y in b:
            if x > y:
                inv += 1
    return -1 if inv % 2 else 1


def wedge(a: dict, b: dict) -> dict:
    out: dict = {}
    for ma, ca in a.items():
        sa = set(ma)
        for mb, cb in b.items():
            if sa.intersection(mb):
                continue
            m = tuple(sorted(ma + mb))
            v = out.get(m, ZERO) + merge_sign(ma, mb) * ca * cb
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return out


def vector_form(v: Sequence) -> dict:
    return {(i,): Fraction(x) for i, x in enumerate(v) if x}


def wedge_vectors(vectors: Sequence[Sequence]) -> dict:
    out: dict = {(): Fraction(1)}
    for v in vectors:
        out = wedge(out, vector_form(v))
    return out


def to_dense(form: dict, n: int, p: int) -> list[Fraction]:
    idx = monomial_index(n, p)
    out = [ZERO] * len(idx)
    for m, c in form.items():
        out[idx[m]] = c
    return out


def from_dense(vec: Sequence, n: int, p: int) -> dict:
    return {m: Fraction(c) for m, c in zip(monomials(n, p), vec) if c}


def exterior_power_matrix(a: QMat, p: int) -> QMat:
    """Matrix of the p-th exterior power of the linear map with matrix ``a``.

    Column j of ``a`` is the image of the j-th source basis vector; entries of
    the result are the p x p minors.
    """
    rows_m = monomials(a.rows, p)
    cols_m = monomials(a.cols, p)
    out = []
    for r in rows_m:
        line = []
        for c in cols_m:
            line.append(det(QMat([[a[i, j] for j in c] for i in r], len(c))) if p else Fraction(1))
        out.append(line)
    return QMat(out, len(cols_m))


def contraction(omega: dict, phi: dict) -> dict:
    """Interior product omega _| phi of a q-vector by a p-form (p <= q).

    In the basis e and its dual basis, ``e_J ^ e_K _| e_J^dual = e_K`` and a
    monomial not containing J contracts to zero.
    """
    out: dict = {}
    if not omega or not phi:
        return out
    q = len(next(iter(omega)))
    p = len(next(iter(phi)))
    if p > q:
        raise ValueError("contraction degree exceeds the polyvector degree")
    for mo, co in omega.items():
        so = set(mo)
        for mf, cf in phi.items():
            if not so.issuperset(mf):
                continue
            rest = tuple(x for x in mo if x not in mf)
            v = out.get(rest, ZERO) + merge_sign(mf, rest) * co * cf
            if v:
                out[rest] = v
            else:
                out.pop(rest, None)
    return out
