"""Finite commutative rings, involutions, and the norm tensor construction."""

import pytest

from tcrcalc import ringkit
from tcrcalc.abelian import GroupHom, kernel
from tcrcalc.ringkit import (
    fixed_subring,
    frobenius,
    is_perfect,
    mu_is_iso,
    norm_tensor,
    parse_ring,
    two_adic_tower,
    witt_tower,
)
from tcrcalc._errors import ParseError

import support

CANONICAL = [
    "Z/8",
    "GF(2,x)",
    "GF(2,x^2+x+1)",
    "Z/4xZ/2",
    "Z/4[C2]",
    "W2(GF(2,x))",
    "GF(2,x^2+x+1) with galois",
    "Z/4xZ/4 with swap",
    "Z",
    "GF(2,x^3+x+1)",
    "GF(3,x^2+1)",
    "Z/9",
    "GF(2,x)xGF(2,x^2+x+1)",
]

NORM_TENSOR_CASES = [
    "GF(2,x)",
    "Z/8",
    "Z/9",
    "GF(2,x^2+x+1) with galois",
    "Z/4[C2]",
    "GF(2,x)[C2]",
    "Z/4xZ/4 with swap",
]


def test_parse_then_describe_is_the_identity():
    for spec in CANONICAL:
        assert parse_ring(spec).describe() == spec


def test_parse_rejects_malformed_specs():
    for spec in ["banana", "GF(4,x)", "Z/1"]:
        with pytest.raises(ParseError):
            parse_ring(spec)


def test_small_ring_family_parses_and_validates():
    # FinRing construction re-checks commutativity, associativity and units
    for spec in support.SMALL_RINGS:
        ring = parse_ring(spec).ring
        assert ring.group.order() <= 9


def test_frobenius_flags_track_perfection():
    f4 = parse_ring("GF(2,x^2+x+1)").ring
    fr = frobenius(f4, 2)
    assert fr.additive and fr.bijective
    assert fr.hom.compose(fr.hom) == GroupHom.identity(f4.group)
    assert is_perfect(f4, 2)

    z4 = parse_ring("Z/4").ring
    fr4 = frobenius(z4, 2)
    assert not fr4.additive
    assert not fr4.bijective
    assert not is_perfect(z4, 2)

    # squaring is the identity on a product of copies of the prime field
    assert is_perfect(parse_ring("Z/2xZ/2").ring, 2)
    # the dual numbers have a nilpotent, so squaring is not injective
    assert not is_perfect(parse_ring("GF(2,x)[C2]").ring, 2)


@pytest.mark.parametrize(
    "spec",
    [
        "GF(2,x^2+x+1) with galois",
        "Z/4xZ/4 with swap",
        "Z/2xZ/2 with swap",
        "Z/4[C2]",
        "Z/8",
    ],
)
def test_fixed_subring_laws(spec):
    inv = parse_ring(spec)
    amb = inv.ring
    sub, incl, tr = fixed_subring(inv)
    w = inv.w
    for a in sub.elements():
        assert w(incl(a)) == incl(a)
    for x in amb.elements():
        assert incl(tr(x)) == amb.add(x, w(x))
    for a in sub.elements():
        for x in amb.elements():
            assert tr(amb.mul(incl(a), x)) == sub.mul(a, tr(x))
    fsub = inv.fixed()
    for x in amb.elements():
        assert incl(fsub.norm(inv, x)) == amb.mul(x, w(x))


@pytest.mark.parametrize("spec", NORM_TENSOR_CASES)
def test_norm_tensor_order_matches_the_enumeration_oracle(spec):
    inv = parse_ring(spec)
    nt = norm_tensor(inv)
    assert nt.ring.order() == support.mu_oracle_order(inv)


@pytest.mark.parametrize("spec", NORM_TENSOR_CASES)
def test_mu_has_a_section(spec):
    nt = norm_tensor(parse_ring(spec))
    fixed = nt.fixed.ring
    for x in fixed.elements():
        assert nt.mu(nt.section(x)) == x


@pytest.mark.parametrize("spec", NORM_TENSOR_CASES)
def test_mu_iso_flag_matches_the_oracle(spec):
    inv = parse_ring(spec)
    nt = norm_tensor(inv)
    flag, witness = mu_is_iso(inv)
    assert flag == (support.mu_oracle_order(inv) == nt.fixed.ring.order())
    if flag:
        assert witness is None
    else:
        ker, _ = kernel(nt.mu)
        assert list(ker.invariants) == witness["kernel"]
        assert all(f and f & (f - 1) == 0 for f in witness["kernel"])
        el = tuple(witness["element"])
        assert nt.mu(el) == nt.fixed.ring.group.zero()
        assert nt.ring.group.element_order(el) == witness["order"]


def test_two_adic_tower_levels_and_transitions():
    tow = two_adic_tower()
    assert tow.describe() == "Z"
    for n in (1, 2, 3):
        assert tow.level(n).ring.group.invariants == (2 ** n,)
    t = tow.transition(2)
    assert t.source.order() == 2 * t.target.order()
    assert len(support.hom_image(t)) == t.target.order()


def test_mu_stabilizes_on_the_two_adic_tower():
    assert mu_is_iso(two_adic_tower()) == (True, None)


def test_witt_tower_of_a_perfect_field():
    tow = witt_tower(parse_ring("GF(2,x^2+x+1)").ring)
    assert tow.level(1).ring.group.invariants == (2, 2)
    assert tow.level(2).ring.group.invariants == (4, 4)
