"""Integer matrix normal forms, finite abelian groups, and chain complexes."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tcrcalc import abelian
from tcrcalc.abelian import (
    ChainComplex,
    ChainMap,
    FinAbGroup,
    GroupHom,
    IntMatrix,
    Z,
    cokernel,
    direct_sum,
    group_from_addition,
    kernel,
    mapping_cone,
    presentation,
    quotient_by_elements,
    smith_normal_form,
    solve,
)
from tcrcalc._errors import EnumerationBudget

import support

entries = st.integers(min_value=-9, max_value=9)


@st.composite
def int_matrices(draw, max_dim=4):
    rows = draw(st.integers(1, max_dim))
    cols = draw(st.integers(1, max_dim))
    data = draw(
        st.lists(
            st.lists(entries, min_size=cols, max_size=cols),
            min_size=rows,
            max_size=rows,
        )
    )
    return IntMatrix(data)


@st.composite
def uniform_endomorphisms(draw, max_n=6, max_rank=3):
    # on a group (n, ..., n) every integer matrix is a valid endomorphism
    n = draw(st.integers(2, max_n))
    k = draw(st.integers(1, max_rank))
    g = FinAbGroup((n,) * k)
    data = draw(
        st.lists(
            st.lists(st.integers(-6, 6), min_size=k, max_size=k),
            min_size=k,
            max_size=k,
        )
    )
    return GroupHom(g, g, IntMatrix(data))


@given(int_matrices())
def test_smith_normal_form_factors_the_matrix(m):
    u, d, v = smith_normal_form(m)
    for j in range(m.cols):
        e = [1 if i == j else 0 for i in range(m.cols)]
        assert list(d.apply(e)) == support.apply_chain([u, m, v], e)


@given(int_matrices())
def test_smith_normal_form_diagonal_shape(m):
    _, d, _ = smith_normal_form(m)
    for i in range(d.rows):
        for j in range(d.cols):
            if i != j:
                assert d.entries[i][j] == 0
    diag = [d.entries[i][i] for i in range(min(d.rows, d.cols))]
    nonzero = [x for x in diag if x]
    assert all(x > 0 for x in nonzero)
    for a, b in zip(nonzero, nonzero[1:]):
        assert b % a == 0
    # zeros, if any, come after every nonzero entry
    if 0 in diag:
        assert all(x == 0 for x in diag[diag.index(0):])


@given(int_matrices())
def test_smith_normal_form_is_idempotent_and_unimodular(m):
    u, d, v = smith_normal_form(m)
    _, d2, _ = smith_normal_form(d)
    assert d2.entries == d.entries
    for square in (u, v):
        _, ds, _ = smith_normal_form(square)
        assert all(ds.entries[i][i] == 1 for i in range(ds.rows))


def test_presentation_collapses_relations():
    g, _, _ = presentation([4, 6])
    assert g.invariants == (2, 12)
    g, _, _ = presentation([1, 1])
    assert g.invariants == ()
    g, _, _ = presentation([0])
    assert g.invariants == (0,)


@given(st.lists(st.integers(2, 10), max_size=3))
def test_presentation_roundtrip(factors):
    g, to_nf, from_nf = presentation(factors)
    for x in g.elements():
        raw = from_nf.apply(list(x))
        assert g.normalize(to_nf.apply(list(raw))) == x


def test_invariants_must_be_a_divisibility_chain():
    for bad in [(4, 2), (1, 2), (0, 2), (2, 3)]:
        with pytest.raises(ValueError):
            FinAbGroup(bad)


def test_group_arithmetic():
    g = FinAbGroup((2, 4))
    assert g.order() == 8
    assert len(list(g.elements())) == 8
    assert g.zero() == (0, 0)
    x = (1, 3)
    assert g.add(x, g.neg(x)) == g.zero()
    assert g.normalize((3, 7)) == (1, 3)
    assert g.scalar(3, (1, 1)) == (1, 3)
    assert g.element_order((0, 1)) == 4
    assert abelian.cyclic(6).invariants == (6,)
    assert Z.invariants == (0,)
    assert FinAbGroup((2, 0)).describe() == "Z/2 + Z"


def test_element_enumeration_respects_the_budget(monkeypatch):
    monkeypatch.setenv("TCRCALC_MAX_ENUM", "8")
    with pytest.raises(EnumerationBudget):
        list(FinAbGroup((16,)).elements())
    monkeypatch.delenv("TCRCALC_MAX_ENUM")
    assert len(list(FinAbGroup((16,)).elements())) == 16


def test_homs_must_be_well_defined():
    c2, c4 = FinAbGroup((2,)), FinAbGroup((4,))
    GroupHom(c2, c4, IntMatrix([[2]]))
    with pytest.raises(ValueError):
        GroupHom(c2, c4, IntMatrix([[1]]))


def test_hom_algebra():
    c4 = FinAbGroup((4,))
    h = GroupHom(c4, c4, IntMatrix([[3]]))
    assert h((1,)) == (3,)
    assert h == GroupHom.from_images(c4, c4, [(3,)])
    hh = h.compose(h)
    assert all(hh(x) == x for x in c4.elements())
    assert hh == GroupHom.identity(c4)
    assert (h + h.scale(-1)).is_zero()
    assert h - h == GroupHom.zero(c4, c4)
    assert not h.is_zero()


@given(uniform_endomorphisms())
def test_kernel_matches_brute_enumeration(h):
    ker, incl = kernel(h)
    assert ker.order() == support.hom_kernel_order(h)
    kset = {incl(x) for x in ker.elements()}
    assert len(kset) == ker.order()
    assert all(h(v) == h.target.zero() for v in kset)


@given(uniform_endomorphisms())
def test_kernel_and_image_orders_multiply(h):
    ker, _ = kernel(h)
    assert ker.order() * len(support.hom_image(h)) == h.source.order()


@given(uniform_endomorphisms())
def test_cokernel_matches_brute_enumeration(h):
    cok, proj = cokernel(h)
    assert cok.order() * len(support.hom_image(h)) == h.source.order()
    assert proj.compose(h).is_zero()
    assert len(support.hom_image(proj)) == cok.order()


@given(uniform_endomorphisms(), st.data())
def test_solve_finds_preimages(h, data):
    x0 = data.draw(st.sampled_from(sorted(h.source.elements())))
    y = h(x0)
    x = solve(h, y)
    assert x is not None
    assert h(tuple(x)) == y


@given(uniform_endomorphisms())
def test_solve_reports_unreachable_targets(h):
    img = support.hom_image(h)
    outside = [y for y in h.target.elements() if y not in img]
    if outside:
        assert solve(h, outside[0]) is None


def test_quotient_by_elements():
    g = FinAbGroup((4, 4))
    q, proj = quotient_by_elements(g, [(2, 0)])
    assert q.order() == 8
    assert proj((2, 0)) == q.zero()
    assert len(support.hom_image(proj)) == 8


def test_direct_sum_injections_and_projections():
    a, b = FinAbGroup((2,)), FinAbGroup((4,))
    total, injs, projs = direct_sum([a, b])
    assert total.order() == 8
    for g, inj, proj in zip((a, b), injs, projs):
        comp = proj.compose(inj)
        assert all(comp(x) == x for x in g.elements())


def test_inverse_of_an_isomorphism():
    c4 = FinAbGroup((4,))
    h = GroupHom(c4, c4, IntMatrix([[3]]))
    assert abelian.is_iso(h)
    hinv = abelian.inverse(h)
    assert hinv.compose(h) == GroupHom.identity(c4)
    assert not abelian.is_iso(GroupHom(c4, c4, IntMatrix([[2]])))


def test_chain_homology_of_multiplication_by_two():
    two = GroupHom(Z, Z, IntMatrix([[2]]))
    c = ChainComplex({0: Z, 1: Z}, {1: two})
    assert c.homology(0).invariants == (2,)
    assert c.homology(1).invariants == ()


def test_zero_differentials_give_back_the_chain_groups():
    g = FinAbGroup((2, 4))
    c = ChainComplex({0: g, 1: g}, {1: GroupHom.zero(g, g)})
    assert c.homology(0).invariants == (2, 4)
    assert c.homology(1).invariants == (2, 4)


def test_differentials_must_square_to_zero():
    ident = GroupHom(Z, Z, IntMatrix([[1]]))
    with pytest.raises(ValueError):
        ChainComplex({0: Z, 1: Z, 2: Z}, {1: ident, 2: ident})


def test_chain_maps_must_commute_with_the_differentials():
    g = FinAbGroup((4,))
    two = GroupHom(g, g, IntMatrix([[2]]))
    c = ChainComplex({0: g, 1: g}, {1: two})
    ChainMap(c, c, {0: GroupHom.identity(g), 1: GroupHom.identity(g)})
    with pytest.raises(ValueError):
        ChainMap(c, c, {0: GroupHom.identity(g), 1: two})


def test_cone_of_the_identity_is_acyclic():
    g = FinAbGroup((4,))
    two = GroupHom(g, g, IntMatrix([[2]]))
    c = ChainComplex({0: g, 1: g}, {1: two})
    ident = ChainMap(c, c, {0: GroupHom.identity(g), 1: GroupHom.identity(g)})
    cone = mapping_cone(ident)
    for d in cone.degrees():
        assert cone.homology(d).invariants == ()


def test_blackbox_group_recovery():
    elems = [(i, j) for i in range(2) for j in range(3)]

    def add(x, y):
        return ((x[0] + y[0]) % 2, (x[1] + y[1]) % 3)

    chart = group_from_addition(elems, add, (0, 0))
    assert chart.group.invariants == (6,)
    for e in elems:
        assert chart.element(chart.coords(e)) == e

    other = group_from_addition(list(range(6)), lambda a, b: (a + b) % 6, 0)
    h = chart.hom_to(other, lambda e: (3 * e[0] + 4 * e[1]) % 6)
    assert abelian.is_iso(h)
