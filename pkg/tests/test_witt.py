"""Truncated p-typical Witt vectors over small rings."""

import numpy as np
import pytest

from tcrcalc import ringkit, witt
from tcrcalc.abelian import GroupHom
from tcrcalc.ringkit import parse_ring
from tcrcalc._errors import Refusal

import support


def ring_of(spec):
    return parse_ring(spec).ring


def test_witt_rings_of_prime_fields_are_cyclic():
    f2 = ring_of("GF(2,x)")
    for n in range(1, 5):
        assert witt.witt_finring(f2, 2, n).group.invariants == (2 ** n,)
    f3 = ring_of("Z/3")
    for n in range(1, 4):
        assert witt.witt_finring(f3, 3, n).group.invariants == (3 ** n,)


def test_length_one_recovers_the_base_ring():
    for spec in support.SMALL_RINGS:
        ring = ring_of(spec)
        for p in (2, 3):
            assert witt.witt_finring(ring, p, 1).group.invariants == ring.group.invariants


def test_length_two_vectors_over_the_four_element_field():
    f4 = ring_of("GF(2,x^2+x+1)")
    assert witt.witt_finring(f4, 2, 2).group.invariants == (4, 4)


def test_mixed_characteristic_splits_off_ghost_coordinates():
    # 2 is invertible in the Z/3 factor of Z/6, so that factor contributes
    # plain ghost coordinates: the length two ring is Z/4 x Z/3 x Z/3
    z6 = ring_of("Z/6")
    assert witt.witt_finring(z6, 2, 2).group.invariants == (3, 12)


def test_core_identity_families_run_and_pass():
    counts = witt.verify_core_identities(ring_of("GF(2,x)"), 2, 3)
    for n in (2, 3):
        for family in ("FV=p", "V(F(x)y)=xV(y)", "ghost naturality", "[a][b]=[ab]"):
            assert counts[f"{family} @ n={n}"] > 0


@pytest.mark.parametrize("spec,p", [("GF(2,x)", 2), ("Z/3", 3), ("GF(2,x^2+x+1)", 2)])
def test_frobenius_after_verschiebung_is_multiplication_by_p(spec, p):
    ring = ring_of(spec)
    for n in (2, 3):
        f = witt.frobenius_hom(ring, p, n)
        v = witt.verschiebung_hom(ring, p, n)
        fv = f.compose(v)
        assert fv == GroupHom.identity(fv.source).scale(p)


def test_restriction_equals_frobenius_only_over_prime_fields():
    for spec, p in [("GF(2,x)", 2), ("Z/3", 3)]:
        ring = ring_of(spec)
        assert witt.restriction_hom(ring, p, 3) == witt.frobenius_hom(ring, p, 3)
    f4 = ring_of("GF(2,x^2+x+1)")
    assert witt.restriction_hom(f4, 2, 2) != witt.frobenius_hom(f4, 2, 2)


def test_packaged_restriction_matches_the_structural_map():
    for spec in ("GF(2,x)", "GF(2,x^2+x+1)"):
        ring = ring_of(spec)
        hi = witt.witt_finring(ring, 2, 2)
        lo = witt.witt_finring(ring, 2, 1)
        assert witt.witt_restriction_hom(hi, lo) == witt.restriction_hom(ring, 2, 2)


def test_structures_are_cached():
    ring = ring_of("GF(2,x)")
    assert witt.witt_structure(ring, 2, 3) is witt.witt_structure(ring, 2, 3)


def test_length_two_sum_and_product_polynomials_over_z5():
    base = ringkit.zmod(5)
    w = witt.witt_ring(base, 2, 2)
    t = w.table
    m = t.size
    idx = np.arange(m ** 4, dtype=np.int64)
    a0, a1, b0, b1 = [(idx // (m ** i)) % m for i in range(4)]
    neg = t.scalar_map(t.char - 1)
    two = t.scalar_map(2)

    s0, s1 = w.add((a0, a1), (b0, b1))
    assert np.array_equal(s0, t.add[a0, b0])
    assert np.array_equal(s1, t.add[t.add[a1, b1], neg[t.mul[a0, b0]]])

    p0, p1 = w.mul((a0, a1), (b0, b1))
    assert np.array_equal(p0, t.mul[a0, b0])
    expected = t.add[
        t.add[t.mul[t.mul[a0, a0], b1], t.mul[a1, t.mul[b0, b0]]],
        two[t.mul[a1, b1]],
    ]
    assert np.array_equal(p1, expected)


def test_unsupported_primes_are_refused():
    with pytest.raises(Refusal):
        witt.build_polys(5, 2)


def test_char_prime():
    assert witt.char_prime(ring_of("GF(2,x^2+x+1)")) == 2
    assert witt.char_prime(ring_of("Z/9")) == 3
    with pytest.raises(Refusal):
        witt.char_prime(ring_of("Z/6"))


def test_packaged_rings_carry_their_construction_data():
    fr = witt.witt_finring(ring_of("GF(2,x)"), 2, 2)
    assert fr.meta["p"] == 2
    assert fr.meta["n"] == 2
    assert {"base", "structure"} <= set(fr.meta)
