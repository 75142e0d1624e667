"""Mackey functors for the group of order two, and Bredon homology of
even-weight representation spheres.

A C2Mackey holds the two levels with restriction, transfer, and Weyl action.
For an even weight k the sphere S^{k rho} carries a cell structure whose chain
complex sits in degrees k..2k: the fixed level at the bottom, the underlying
level above, transfer as the bottom differential, and 1-w, 1+w alternating
further up.  Homology of that complex gives the equivariant homotopy groups.
"""

from __future__ import annotations

from dataclasses import dataclass

from ._errors import ParseError
from .abelian import (
    ChainComplex,
    ChainMap,
    FinAbGroup,
    GradedGroups,
    GroupHom,
    Z,
    corestrict,
    kernel,
    mapping_cone,
)


@dataclass(frozen=True)
class C2Mackey:
    """The two levels of a Z/2-Mackey functor with res, tr, and Weyl action."""

    underlying: FinAbGroup
    fixed: FinAbGroup
    weyl: GroupHom
    res: GroupHom
    tr: GroupHom

    def __post_init__(self):
        w, res, tr = self.weyl, self.res, self.tr
        ident = GroupHom.identity(self.underlying)
        if w.compose(w) != ident:
            raise ValueError("Weyl action must be an involution")
        if res.compose(tr) != ident + w:
            raise ValueError("res after tr must equal 1 + w")
        if w.compose(res) != res:
            raise ValueError("res must land in the fixed part of the action")
        if tr.compose(w) != tr:
            raise ValueError("tr must be invariant under the action")


def constant_mackey(g: FinAbGroup) -> C2Mackey:
    """Both levels g, trivial action, res = 1, tr = 2."""
    ident = GroupHom.identity(g)
    return C2Mackey(underlying=g, fixed=g, weyl=ident, res=ident,
                    tr=ident.scale(2))


def fixedpoint_mackey(g: FinAbGroup, w: GroupHom) -> C2Mackey:
    """Fixed level ker(1-w), res the inclusion, tr = 1 + w corestricted."""
    if w.source != g or w.target != g:
        raise ValueError("the involution must act on the given group")
    ident = GroupHom.identity(g)
    fixed, incl = kernel(ident - w)
    tr = corestrict(ident + w, incl)
    return C2Mackey(underlying=g, fixed=fixed, weyl=w, res=incl, tr=tr)


def rep_sphere_complex(m: C2Mackey, k: int) -> ChainComplex:
    """Cellular chain complex of S^{k rho} with coefficients in m.

    Degrees k..2k; the differential out of k+1 is the transfer, and out of
    k+2, k+3, ... the maps alternate 1-w, 1+w.
    """
    if k < 0 or k % 2:
        raise ParseError("only even nonnegative weights are supported")
    groups = {k: m.fixed}
    diffs = {}
    ident = GroupHom.identity(m.underlying)
    for i in range(k + 1, 2 * k + 1):
        groups[i] = m.underlying
        if i == k + 1:
            diffs[i] = m.tr
        elif (i - k) % 2 == 0:
            diffs[i] = ident - m.weyl
        else:
            diffs[i] = ident + m.weyl
    return ChainComplex(groups, diffs)


def rep_sphere_homotopy(m: C2Mackey, k: int) -> GradedGroups:
    """Equivariant homotopy of the k-th regular-representation suspension."""
    cx = rep_sphere_complex(m, k)
    groups = {i: cx.homology(i) for i in range(k, 2 * k + 1)}
    return GradedGroups(groups=groups, window=(k, 2 * k))


def _two_torsion_pair():
    """The group Z + Z/2 with w(a, x) = (a, [a] + x), in (x, a) coordinates."""
    g = FinAbGroup((2, 0), labels=("x", "a"))
    w = GroupHom.from_images(g, g, [(1, 0), (1, 1)])
    return g, w


def two_torsion_pair_mackey() -> C2Mackey:
    """Fixed-point Mackey functor of Z + Z/2 with w(a, x) = (a, [a] + x)."""
    g, w = _two_torsion_pair()
    return fixedpoint_mackey(g, w)


def norm_cofiber_homotopy(k: int) -> GradedGroups:
    """Homotopy of S^{k rho} smashed with the cofibre of the norm map on HZ.

    Computed as the mapping cone of the chain map that is (x, a) -> 2a on
    underlying levels (and its corestriction 4a at the bottom degree), from
    the sphere complex of the fixed-point Mackey functor of (Z + Z/2, w) to
    the sphere complex of constant Z.
    """
    if k < 0 or k % 2:
        raise ParseError("only even nonnegative weights are supported")
    g, w = _two_torsion_pair()
    mx = fixedpoint_mackey(g, w)
    my = constant_mackey(Z)
    src = rep_sphere_complex(mx, k)
    tgt = rep_sphere_complex(my, k)
    phi_e = GroupHom.from_images(g, Z, [(0,), (2,)])
    maps = {k: phi_e.compose(mx.res)}
    for i in range(k + 1, 2 * k + 1):
        maps[i] = phi_e
    cone = mapping_cone(ChainMap(src, tgt, maps))
    groups = {i: cone.homology(i) for i in range(k, 2 * k + 2)}
    return GradedGroups(groups=groups, window=(k, 2 * k + 1))


def shift_graded(gg: GradedGroups, s: int) -> GradedGroups:
    """Degree shift: the group in degree d moves to degree d + s."""
    return GradedGroups(
        groups={d + s: grp for d, grp in gg.groups.items()},
        window=(gg.window[0] + s, gg.window[1] + s),
        periodicity=gg.periodicity,
    )
