from collections import Counter

from conftest import SHIPPED, complex_of, product_of

from trih.compactified import (
    CCell,
    CompactifiedCellComplex,
    barycentric_subdivision,
    canonical_compactification,
    is_regular_at_infinity,
    product_complex,
)
from trih.fans import point_cycle, product


def test_cell_counts():
    assert complex_of("p1").f_vector() == [3, 2]
    assert complex_of("tropical_line").f_vector() == [4, 3]
    # one pair over the origin, two over each ray, four over each 2-cone
    assert complex_of("p2").f_vector() == [7, 9, 3]
    assert len(complex_of("p2").cells) == 19


def test_strata_classes():
    x = complex_of("p2")
    assert Counter(c.dim for c in x.smooth_cells) == {2: 3, 1: 3}
    assert CCell(frozenset(), frozenset()) in x.singular_cells
    line = complex_of("tropical_line")
    assert len(line.smooth_cells) == 4 and len(line.singular_cells) == 3


def test_cube_faces_and_boundary(shipped):
    name, x = shipped
    for c in x.cells:
        assert len(x.faces(c)) == 3 ** c.dim
        assert x.tangent_dim(c) == c.dim
        total = Counter()
        for f, s in x.boundary(c):
            assert abs(s) == 1 and f.is_face_of(c) and f.dim == c.dim - 1
            for g, t in x.boundary(f):
                total[g] += s * t
        assert not any(total.values()), (name, c)


def test_regular_at_infinity(shipped):
    assert is_regular_at_infinity(shipped[1])


def test_missing_infinity_facet_is_not_regular():
    x = complex_of("tropical_line")
    cells = tuple(c for c in x.cells if c != CCell(frozenset([0]), frozenset([0])))
    assert not is_regular_at_infinity(CompactifiedCellComplex(x.cycle, cells))


def test_barycentric_counts():
    assert barycentric_subdivision(complex_of("p1")).f_vector() == [5, 4]
    assert barycentric_subdivision(complex_of("tropical_line")).f_vector() == [7, 6]


def test_subdivision_euler_and_boundary(shipped):
    name, x = shipped
    sub = barycentric_subdivision(x)
    assert sub.euler_characteristic() == x.euler_characteristic()
    for s in sub.simplices_of_dim(2)[:200]:
        total = Counter()
        for f, a in sub.boundary(s):
            for g, b in sub.boundary(f):
                total[g] += a * b
        assert not any(total.values())
    for s in sub.simplices:
        assert sub.carrier(s) == x.cells[s[-1]]
        for k, i in enumerate(s):
            assert sub.stratum_position(s, x.cells[i]) == k


def test_top_simplex_orientation_matches_cube():
    # in the square of P^2 each top simplex is oriented like the square
    x = complex_of("p2")
    sub = barycentric_subdivision(x)
    tops = sub.simplices_of_dim(2)
    assert Counter(sub.orientation_sign(s) for s in tops) == {1: 12, -1: 12}


def test_product_complex():
    ii = product_complex(complex_of("p1"), complex_of("p1"))
    assert ii.f_vector() == [9, 12, 4]
    pt = canonical_compactification(point_cycle())
    xp = product_complex(complex_of("tropical_line"), pt)
    assert xp.f_vector() == complex_of("tropical_line").f_vector()
    a, b = complex_of("p2"), complex_of("tropical_line")
    assert len(product_complex(a, b).cells) == len(a.cells) * len(b.cells)


def test_product_matches_compactified_product():
    for a, b in [("p1", "tropical_line"), ("tropical_line", "tropical_line"), ("p1", "p1")]:
        x1, x2 = complex_of(a), complex_of(b)
        direct = canonical_compactification(product(x1.cycle, x2.cycle))
        px = product_of(a, b)
        assert set(direct.cells) == set(px.cells)
        assert all(direct.weight(c) == px.weight(c) for c in px.cells)


def test_shipped_products_are_products():
    assert set(complex_of("p1_x_line").cells) == set(product_of("p1", "tropical_line").cells)
    assert set(complex_of("line_x_line").cells) == set(product_of("tropical_line", "tropical_line").cells)


def test_weights_on_top_cells():
    x = complex_of("weight2_line")
    assert [x.weight(t) for t in x.top_cells] == [2, 2]
    for c in x.cells:
        assert x.weight(c) == (2 if len(c.sigma) == x.d else 0)
