"""Connected components of the two-sided bar construction."""

import itertools

import pytest

from tcrcalc import barcalc
from tcrcalc._errors import ParseError, Refusal

import support


def s3():
    elems = list(itertools.permutations(range(3)))

    def mul(a, b):
        return tuple(a[b[i]] for i in range(3))

    def inv(a):
        out = [0] * 3
        for i, v in enumerate(a):
            out[v] = i
        return tuple(out)

    return barcalc.finite_group(elems, mul, inv, name="S3")


def test_symmetric_group_components():
    dec = barcalc.components(s3())
    assert dec.ncomponents() == 5
    assert dec.aut_invariants == (None, (2,), (2,), (2,), ())
    psi = barcalc.psi_on_components(dec)
    tau = barcalc.tau_on_components(dec)
    assert psi.table == (0, 0, 3, 3, 4)
    assert tau.table == (0, 2, 1, 3, 4)
    assert tau.fixed_indices == (0, 3, 4)
    # the squaring map lands in the flip-fixed components
    assert all(tau.table[c] == c for c in psi.table)


def test_order_two_cyclic_group_components():
    dec = barcalc.components(barcalc.cyclic_group(2, "inversion"))
    assert dec.ncomponents() == 4
    assert dec.aut_invariants == ((2,), (2,), (2,), (2,))
    psi = barcalc.psi_on_components(dec)
    tau = barcalc.tau_on_components(dec)
    assert psi.table == (0, 0, 3, 3)
    assert tau.table == (0, 2, 1, 3)
    assert tau.fixed_indices == (0, 3)
    assert tau.swapped_pairs == ((1, 2),)


def test_order_three_cyclic_group_is_connected():
    dec = barcalc.components(barcalc.cyclic_group(3, "inversion"))
    assert dec.ncomponents() == 1
    assert dec.aut_invariants == ((3,),)


def test_orbit_and_closed_form_methods_agree_on_small_groups():
    for factors in support.invariant_chains(12):
        mon = barcalc.abelian_group(factors)
        orb = barcalc.components(mon, method="orbits")
        clo = barcalc.components(mon, method="closed-form")
        assert orb.ncomponents() == clo.ncomponents()
        seen = {}
        for x in mon.elements:
            for y in mon.elements:
                label = clo.closed_form_label(x, y)
                comp = orb.component_of[(x, y)]
                assert seen.setdefault(label, comp) == comp
        assert len(seen) == orb.ncomponents()


def test_closed_form_self_maps_match_the_orbit_tables():
    for factors in support.invariant_chains(8):
        mon = barcalc.abelian_group(factors)
        orb = barcalc.components(mon, method="orbits")
        clo = barcalc.components(mon, method="closed-form")
        psi_orb = barcalc.psi_on_components(orb)
        tau_orb = barcalc.tau_on_components(orb)
        psi_clo = barcalc.psi_on_components(clo)
        tau_clo = barcalc.tau_on_components(clo)
        for i, rep in enumerate(orb.reps):
            label = clo.closed_form_label(*rep)
            psi_image = orb.reps[psi_orb.table[i]]
            assert psi_clo.hom(label) == clo.closed_form_label(*psi_image)
            tau_image = orb.reps[tau_orb.table[i]]
            assert tau_clo.hom(label) == clo.closed_form_label(*tau_image)
        assert tau_clo.fixed_subgroup.order() == len(tau_orb.fixed_indices)


def test_closed_form_automorphism_group_counts_even_factors():
    clo = barcalc.components(barcalc.abelian_group((2, 4)), method="closed-form")
    assert clo.aut_group.invariants == (2, 2)


def test_census_of_the_two_element_group():
    rep = barcalc.abelian_report((2,))
    assert rep.index_group.invariants == (2, 2)
    assert rep.fixed_group.invariants == (2,)
    assert rep.aut_group.invariants == (2,)
    assert (rep.type_one_count, rep.type_two_count, rep.type_two_per_coset) == (2, 1, 1)
    assert rep.finite


def test_census_of_the_integers():
    rep = barcalc.abelian_report((0,))
    assert rep.index_group.invariants == (2, 0)
    assert rep.fixed_group.invariants == (2, 0)
    assert (rep.type_one_count, rep.type_two_count, rep.type_two_per_coset) == (2, None, 1)
    assert not rep.finite


def test_census_of_the_free_rank_two_group():
    rep = barcalc.abelian_report((0, 0))
    assert rep.fixed_group.invariants == (2, 2, 0, 0)
    assert (rep.type_one_count, rep.type_two_count, rep.type_two_per_coset) == (4, None, 2)


def test_census_counts_match_the_orbit_count():
    for factors in support.invariant_chains(12):
        if not factors or any(f & (f - 1) for f in factors):
            continue
        rep = barcalc.abelian_report(factors)
        dec = barcalc.components(barcalc.abelian_group(factors), method="orbits")
        assert rep.type_one_count + rep.type_two_count == dec.ncomponents()


def test_census_refuses_odd_torsion():
    for factors in [(3,), (6,), (2, 6)]:
        with pytest.raises(Refusal):
            barcalc.abelian_report(factors)


def test_group_law_validation():
    # truncated addition has no inverses
    with pytest.raises(ParseError):
        barcalc.finite_group([0, 1, 2], lambda a, b: min(a + b, 2), lambda a: a, name="broken")
    # the identity map is not an anti-involution on a nonabelian group
    elems = list(itertools.permutations(range(3)))

    def mul(a, b):
        return tuple(a[b[i]] for i in range(3))

    with pytest.raises(ParseError):
        barcalc.finite_group(elems, mul, lambda a: a, name="S3-bad")


def test_unknown_involution_scheme_is_rejected():
    with pytest.raises(ParseError, match="scheme"):
        barcalc.cyclic_group(3, "identity")


def test_parse_group_specs():
    assert barcalc.components(barcalc.parse_group("C2")).ncomponents() == 4
    spec = barcalc.parse_group("Z/4 with inversion")
    built = barcalc.cyclic_group(4, "inversion")
    assert barcalc.components(spec).ncomponents() == barcalc.components(built).ncomponents()
    with pytest.raises(ParseError):
        barcalc.parse_group("M12")
