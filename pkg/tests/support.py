"""Shared helpers and independent oracles for the test suite.

Expected values in the tests come from direct enumeration performed here,
from closed forms cross-checked against that enumeration, or from the
frozen constants in fixtures.json. The oracles below recompute results
from first principles so they share no code path with the implementations
they check.
"""

from math import gcd

from tcrcalc.abelian import presentation, quotient_by_elements

# every ring spec with at most nine elements that the exhaustive
# identity sweeps run over
SMALL_RINGS = [
    "Z/2", "Z/3", "Z/4", "GF(2,x^2+x+1)", "Z/5", "Z/6", "Z/7",
    "Z/8", "GF(2,x^3+x+1)", "Z/9", "GF(3,x^2+1)",
    "Z/2xZ/2", "GF(2,x)[C2]", "Z/2xZ/4",
]


def mu_oracle_order(inv):
    """Order of the norm tensor ring, recomputed from scratch.

    Tensors the invariant factors of the fixed subring pairwise, then
    quotients by the additive span of x*n(a) (x) y - x (x) n(a)*y over
    all pairs x, y and all norms n(a). Independent of norm_tensor.
    """
    fsub = inv.fixed()
    fring = fsub.ring
    facs = fring.group.invariants
    n = len(facs)
    pairs = [(i, j) for i in range(n) for j in range(n)]
    tens_group, to_nf, _ = presentation([gcd(facs[i], facs[j]) for (i, j) in pairs])

    def tens(x, y):
        raw = [x[i] * y[j] for (i, j) in pairs]
        return tens_group.normalize(to_nf.apply(raw))

    norms = {fsub.norm(inv, a) for a in inv.ring.elements()}
    rels = []
    for x in fring.elements():
        for y in fring.elements():
            for na in norms:
                left = tens(fring.mul(x, na), y)
                right = tens(x, fring.mul(na, y))
                rels.append(tens_group.add(left, tens_group.neg(right)))
    quot, _ = quotient_by_elements(tens_group, rels)
    return quot.order()


def hom_kernel_order(h):
    """Kernel size of a homomorphism, by plain enumeration."""
    zero = h.target.zero()
    return sum(1 for x in h.source.elements() if h(x) == zero)


def hom_image(h):
    return {h(x) for x in h.source.elements()}


def apply_chain(mats, vec):
    """Apply a list of matrices right to left, like a composition."""
    out = list(vec)
    for m in reversed(mats):
        out = list(m.apply(out))
    return out


def invariant_chains(max_order):
    """All invariant factor chains (d1 | d2 | ...) with product <= max_order."""
    found = [()]

    def grow(prefix, prod):
        start = prefix[-1] if prefix else 2
        for d in range(start, max_order + 1):
            if prefix and d % prefix[-1]:
                continue
            if prod * d > max_order:
                continue
            found.append(prefix + (d,))
            grow(prefix + (d,), prod * d)

    grow((), 1)
    return found
