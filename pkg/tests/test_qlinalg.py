from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trih.qlinalg import (
    LinAlgError,
    QMat,
    QuotientSpace,
    Subspace,
    content,
    det,
    image,
    integer_kernel,
    intersect,
    is_unimodular,
    kernel_basis,
    primitive_vector,
    rank,
    rref,
    smith_invariant_factors,
    solve,
    sum_intersect,
)

small = st.integers(-4, 4)
fractions = st.builds(Fraction, st.integers(-6, 6), st.integers(1, 4))


@st.composite
def matrices(draw, max_rows=5, max_cols=6, entries=fractions):
    r = draw(st.integers(0, max_rows))
    c = draw(st.integers(1, max_cols))
    return QMat([[draw(entries) for _ in range(c)] for _ in range(r)], c)


def test_rref_examples():
    m, piv = rref(QMat.identity(2))
    assert m == QMat.identity(2) and piv == [0, 1]
    m, piv = rref(QMat([[2, 4], [1, 2]]))
    assert m == QMat([[1, 2], [0, 0]]) and piv == [0]


def test_fraction_normal_form():
    m = QMat([[Fraction(2, -4)]])
    x = m[0, 0]
    assert (x.numerator, x.denominator) == (-1, 2)


def test_kernel_examples():
    assert kernel_basis(QMat.zeros(3, 3)).dim == 3
    assert kernel_basis(QMat.identity(3)).dim == 0
    k = kernel_basis(QMat([[1, 1, 1]]))
    assert k.dim == 2
    assert all(sum(row) == 0 for row in k.basis.to_lists())


def test_sum_intersect_examples():
    a = Subspace(2, [[1, 0]])
    b = Subspace(2, [[0, 1]])
    s, i = sum_intersect(a, b)
    assert s.dim == 2 and i.dim == 0
    s, i = sum_intersect(a, a)
    assert s == a and i == a
    with pytest.raises(LinAlgError):
        sum_intersect(a, Subspace(3, []))


def test_primitive_vector_examples():
    assert primitive_vector([4, -6]) == (2, -3)
    assert primitive_vector([1, 0, 0]) == (1, 0, 0)
    assert primitive_vector([0, -8]) == (0, -1)
    with pytest.raises(LinAlgError):
        primitive_vector([0, 0])


def test_unimodular_examples():
    assert is_unimodular([(1, 0), (1, 1)])
    assert not is_unimodular([(1, 0), (1, 2)])
    assert not is_unimodular([(2, 0)])
    assert is_unimodular([(1, 2, 3)])
    assert not is_unimodular([(1, 0), (2, 0)])


def test_smith_and_integer_kernel():
    assert smith_invariant_factors([[2, 0], [0, 3]]) == [1, 6]
    ker = integer_kernel([[1, 1, 1]], 3)
    assert len(ker) == 2
    assert all(sum(v) == 0 for v in ker)
    # the kernel lattice is saturated: its maximal minors have gcd 1
    assert is_unimodular(ker)


def test_solve_and_det():
    m = QMat([[1, 2], [3, 4]])
    assert det(m) == -2
    x = solve(m, [5, 6])
    assert m.apply(x) == [5, 6]
    assert solve(QMat([[1, 1], [1, 1]]), [0, 1]) is None


def test_quotient_small():
    q = QuotientSpace.of_full(3, [[1, 1, 0]])
    assert q.dim == 2
    assert q.project([1, 1, 0]) == [0, 0]
    with pytest.raises(LinAlgError):
        QuotientSpace(Subspace(3, [[1, 0, 0]]), Subspace(3, [[0, 1, 0]]))


# --- randomized properties ------------------------------------------------


@settings(max_examples=300, deadline=None)
@given(matrices())
def test_rref_idempotent_and_rank_preserving(m):
    r, piv = rref(m)
    r2, piv2 = rref(r)
    assert r2 == r and piv2 == piv
    assert rank(r) == rank(m) == len(piv)
    assert piv == sorted(set(piv))


@settings(max_examples=300, deadline=None)
@given(matrices())
def test_rank_nullity(m):
    k = kernel_basis(m)
    assert k.dim + rank(m) == m.cols
    for row in k.basis.to_lists():
        assert all(x == 0 for x in m.apply(row))
    assert image(m).dim == rank(m)


@settings(max_examples=300, deadline=None)
@given(matrices(max_rows=4, max_cols=5), st.data())
def test_quotient_round_trip(m, data):
    n = m.cols
    killed = Subspace(n, m.to_lists())
    q = QuotientSpace.of_full(n, m.to_lists())
    assert q.dim == n - killed.dim
    coords = data.draw(st.lists(fractions, min_size=q.dim, max_size=q.dim))
    assert q.project(q.lift(coords)) == coords
    v = data.draw(st.lists(fractions, min_size=n, max_size=n))
    back = q.lift(q.project(v))
    assert killed.contains([a - b for a, b in zip(back, v)])


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(-50, 50), min_size=1, max_size=5).filter(any))
def test_primitive_vector_content_one(v):
    w = primitive_vector(v)
    assert content(w) == 1
    c = content(v)
    assert [c * x for x in w] == list(v)


@settings(max_examples=150, deadline=None)
@given(matrices(max_rows=3, max_cols=4, entries=small), matrices(max_rows=3, max_cols=4, entries=small))
def test_dimension_formula(a, b):
    if a.cols != b.cols:
        return
    sa, sb = Subspace(a.cols, a.to_lists()), Subspace(b.cols, b.to_lists())
    s, i = sum_intersect(sa, sb)
    assert s.dim + i.dim == sa.dim + sb.dim
    assert i == intersect(sb, sa)
    assert i.is_subspace_of(sa) and i.is_subspace_of(sb)


@settings(max_examples=150, deadline=None)
@given(st.lists(st.lists(st.integers(-3, 3), min_size=3, max_size=3), min_size=1, max_size=3))
def test_unimodular_matches_smith(rays):
    factors = smith_invariant_factors(rays)
    expected = len(factors) == len(rays) and all(f == 1 for f in factors)
    assert is_unimodular(rays) == expected
