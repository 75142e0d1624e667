"""Component bookkeeping for two-sided bar constructions over a group with
anti-involution.

The objects here are purely combinatorial: the set of connected components
of the bar construction B(G2, G, G2) on the fixed points G2 of the
anti-involution, the automorphism group attached to each component, and two
self-maps of the component index set (the squaring map ``psi`` and the flip
``tau``).  Finite groups are handled by orbit enumeration, finitely
generated abelian groups with trivial involution by closed-form normal-form
arithmetic; the two branches are cross-checked in the test suite.
"""

from dataclasses import dataclass

from ._errors import ParseError, Refusal, check_budget, max_enum, poll
from .abelian import FinAbGroup, GroupHom, kernel, presentation

__all__ = [
    "MonoidWithAntiInv",
    "ComponentDecomposition",
    "ComponentSelfMap",
    "AbelianBarReport",
    "finite_group",
    "abelian_group",
    "cyclic_group",
    "parse_group",
    "components",
    "psi_on_components",
    "tau_on_components",
    "abelian_report",
]


# ---------------------------------------------------------------------------
# groups with anti-involution


@dataclass
class MonoidWithAntiInv:
    """A group with an anti-involution w (w(gh) = w(h)w(g), w^2 = id).

    ``elements`` is an explicit tuple for finite groups and None when only
    the normal-form data of an infinite abelian group is available.  In the
    abelian case ``group`` holds the invariant-factor form and elements are
    coordinate tuples; ``trivial_w`` records whether w is the identity.
    """

    name: str
    elements: tuple
    mul: object
    w: object
    e: object
    group: FinAbGroup = None
    trivial_w: bool = False

    def is_finite(self):
        return self.elements is not None

    def fixed_elements(self):
        if self.elements is None:
            raise Refusal(f"{self.name} is infinite; no element enumeration")
        return tuple(x for x in self.elements if self.w(x) == x)

    def describe(self):
        return self.name


def finite_group(elements, mul, w, name="G") -> MonoidWithAntiInv:
    """Wrap an explicit finite group and anti-involution, checking the group
    laws and the anti-involution identities exhaustively."""
    elements = tuple(elements)
    n = len(elements)
    if n == 0:
        raise ParseError("a group needs at least an identity element")
    check_budget(n * n, "group law verification")
    index = {x: i for i, x in enumerate(elements)}
    if len(index) != n:
        raise ParseError("duplicate elements in group listing")
    e = None
    for cand in elements:
        if all(mul(cand, x) == x and mul(x, cand) == x for x in elements):
            e = cand
            break
    if e is None:
        raise ParseError("no identity element found")
    for x in elements:
        for y in elements:
            if mul(x, y) not in index:
                raise ParseError("multiplication leaves the element set")
        if not any(mul(x, y) == e for y in elements):
            raise ParseError(f"element {x!r} has no inverse")
    if n * n * n <= max_enum():
        for x in elements:
            for y in elements:
                for z in elements:
                    if mul(mul(x, y), z) != mul(x, mul(y, z)):
                        raise ParseError("multiplication is not associative")
    for x in elements:
        if w(w(x)) != x:
            raise ParseError("w is not an involution")
        for y in elements:
            if w(mul(x, y)) != mul(w(y), w(x)):
                raise ParseError("w is not an anti-homomorphism")
    trivial = all(w(x) == x for x in elements)
    return MonoidWithAntiInv(name=name, elements=elements, mul=mul, w=w, e=e,
                             trivial_w=trivial)


def abelian_group(factors, name=None) -> MonoidWithAntiInv:
    """Finitely generated abelian group in invariant-factor form with the
    trivial involution.  Factor 0 stands for an infinite cyclic summand."""
    group, _, _ = presentation([int(d) for d in factors])
    name = name or group.describe()
    if group.is_finite() and group.order() <= max_enum():
        elements = tuple(group.elements())
    else:
        elements = None
    return MonoidWithAntiInv(name=name, elements=elements, mul=group.add,
                             w=lambda x: x, e=group.zero(), group=group,
                             trivial_w=True)


def cyclic_group(n, scheme="trivial") -> MonoidWithAntiInv:
    """Cyclic group of order n (n = 0 for the integers); scheme is
    ``trivial`` or ``inversion``."""
    g = abelian_group((int(n),), name=f"C{n}" if n else "Z")
    if scheme == "inversion":
        grp = g.group
        g = MonoidWithAntiInv(name=g.name + " with inversion",
                              elements=g.elements, mul=grp.add, w=grp.neg,
                              e=grp.zero(), group=grp,
                              trivial_w=(n in (1, 2)))
    elif scheme != "trivial":
        raise ParseError(f"unknown involution scheme: {scheme!r}")
    return g


def parse_group(text: str) -> MonoidWithAntiInv:
    """Parse a group description.

    Grammar: atoms ``Z``, ``Z/n``, ``Cn`` joined by ``+``, with an optional
    trailing ``with inversion`` or ``with trivial`` choosing the involution
    (default trivial).  ``Cn`` and ``Z/n`` both mean the cyclic group of
    order n; ``Z`` is the infinite cyclic group.
    """
    src = text.strip()
    scheme = "trivial"
    for suffix, name in ((" with inversion", "inversion"),
                         (" with trivial", "trivial")):
        if src.endswith(suffix):
            scheme = name
            src = src[:-len(suffix)].strip()
            break
    if not src:
        raise ParseError(f"empty group description: {text!r}")
    factors = []
    for atom in src.split("+"):
        atom = atom.strip()
        if atom == "Z":
            factors.append(0)
        elif atom.startswith("Z/") and atom[2:].isdigit() and int(atom[2:]):
            factors.append(int(atom[2:]))
        elif atom.startswith("C") and atom[1:].isdigit() and int(atom[1:]):
            factors.append(int(atom[1:]))
        else:
            raise ParseError(f"cannot parse group atom {atom!r}")
    g = abelian_group(factors, name=src)
    if scheme == "inversion":
        grp = g.group
        g = MonoidWithAntiInv(name=src + " with inversion",
                              elements=g.elements, mul=grp.add, w=grp.neg,
                              e=grp.zero(), group=grp,
                              trivial_w=grp.exponent() in (1, 2))
    return g


# ---------------------------------------------------------------------------
# component decompositions


@dataclass
class ComponentDecomposition:
    """Components of B(G2, G, G2) with their automorphism groups.

    ``method`` is "orbits" (explicit representatives, finite groups) or
    "closed-form" (abelian with trivial involution; the index set is the
    group G + G/2 and every component has automorphism group G[2]).
    """

    monoid: MonoidWithAntiInv
    method: str
    reps: tuple = None
    component_of: dict = None
    auts: tuple = None
    aut_invariants: tuple = None
    index_group: FinAbGroup = None
    aut_group: FinAbGroup = None
    mod2_positions: tuple = None
    to_nf: object = None
    from_nf: object = None

    def ncomponents(self):
        if self.method == "orbits":
            return len(self.reps)
        return self.index_group.order()

    def closed_form_label(self, x, y):
        """Normal-form index of the component of the pair (x, y)."""
        if self.method != "closed-form":
            raise Refusal("labels only exist on the closed-form branch")
        grp = self.monoid.group
        s = grp.add(x, y)
        bits = [y[i] % 2 for i in self.mod2_positions]
        return self.index_group.normalize(self.to_nf.apply(list(s) + bits))

    def component_labels(self):
        if self.method == "orbits":
            return tuple(f"[{x!r},{y!r}]" for x, y in self.reps)
        return (self.index_group.describe(),)


class _DisjointSets:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def _act_right(m, x, g):
    return m.mul(m.mul(m.w(g), x), g)


def _act_left(m, g, y):
    return m.mul(m.mul(g, y), m.w(g))


def components(g: MonoidWithAntiInv, method="auto",
               token=None) -> ComponentDecomposition:
    """Decompose B(G2, G, G2) into components.

    The relation is generated by (x.g, y) ~ (x, g.y) with x.g = w(g)xg and
    g.y = gyw(g); automorphism groups are the joint stabilizers.  ``method``
    chooses the enumeration branch ("orbits"), the abelian normal-form
    branch ("closed-form"), or picks automatically.
    """
    if method == "auto":
        method = "orbits" if g.is_finite() else "closed-form"
    if method == "orbits":
        return _components_orbits(g, token)
    if method == "closed-form":
        return _components_closed_form(g)
    raise ParseError(f"unknown method {method!r}")


def _components_orbits(g, token):
    fixed = g.fixed_elements()
    nf = len(fixed)
    check_budget(nf * nf * max(len(g.elements), 1), "bar component orbits")
    pairs = [(x, y) for x in fixed for y in fixed]
    pos = {p: i for i, p in enumerate(pairs)}
    dsu = _DisjointSets(len(pairs))
    for i, (x, y) in enumerate(pairs):
        poll(token)
        for gg in g.elements:
            a = (_act_right(g, x, gg), y)
            b = (x, _act_left(g, gg, y))
            if a not in pos or b not in pos:
                raise AssertionError("the actions left the fixed points")
            dsu.union(pos[a], pos[b])
        if i and i % 64 == 0:
            poll(token)
    roots = {}
    for i in range(len(pairs)):
        roots.setdefault(dsu.find(i), []).append(i)
    reps = []
    comp_of = {}
    for root in sorted(roots):
        idx = len(reps)
        reps.append(pairs[min(roots[root])])
        for i in roots[root]:
            comp_of[pairs[i]] = idx
    auts = []
    for x, y in reps:
        auts.append(tuple(gg for gg in g.elements
                          if _act_right(g, x, gg) == x
                          and _act_left(g, gg, y) == y))
    aut_inv = tuple(_abelian_invariants(aut, g.mul, g.e) for aut in auts)
    return ComponentDecomposition(monoid=g, method="orbits",
                                  reps=tuple(reps), component_of=comp_of,
                                  auts=tuple(auts), aut_invariants=aut_inv)


def _components_closed_form(g):
    if g.group is None or not g.trivial_w:
        raise Refusal("the closed-form branch needs an abelian group with"
                      " trivial involution")
    grp = g.group
    factors = grp.invariants
    positions = tuple(i for i, d in enumerate(factors)
                      if d == 0 or d % 2 == 0)
    raw = list(factors) + [2] * len(positions)
    index_group, to_nf, from_nf = presentation(raw)
    aut_group = FinAbGroup((2,) * sum(1 for d in factors
                                      if d != 0 and d % 2 == 0))
    return ComponentDecomposition(monoid=g, method="closed-form",
                                  index_group=index_group,
                                  aut_group=aut_group,
                                  mod2_positions=positions,
                                  to_nf=to_nf, from_nf=from_nf)


def _abelian_invariants(elems, mul, e):
    """Invariant factors of a finite abelian group given as an element set;
    None when the elements do not commute."""
    elems = tuple(elems)
    for a in elems:
        for b in elems:
            if mul(a, b) != mul(b, a):
                return None
    n = len(elems)
    if n == 1:
        return ()
    by_prime = {}
    for p in _prime_factors(n):
        v = _valuation(n, p)
        counts = [1]
        for i in range(1, v + 1):
            q = p ** i
            counts.append(sum(1 for x in elems if _power(mul, e, x, q) == e))
        geq = [_valuation(counts[i], p) - _valuation(counts[i - 1], p)
               for i in range(1, v + 1)]
        lam = []
        for i, g_i in enumerate(geq):
            m = g_i - (geq[i + 1] if i + 1 < len(geq) else 0)
            lam += [i + 1] * m
        by_prime[p] = sorted(lam, reverse=True)
    width = max(len(lam) for lam in by_prime.values())
    divisors = []
    for j in range(width):
        d = 1
        for p, lam in by_prime.items():
            if j < len(lam):
                d *= p ** lam[j]
        divisors.append(d)
    return tuple(sorted(divisors))


def _power(mul, e, x, k):
    acc = e
    for _ in range(k):
        acc = mul(acc, x)
    return acc


def _valuation(n, p):
    v = 0
    while n % p == 0 and n > 0:
        n //= p
        v += 1
    return v


def _prime_factors(n):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# ---------------------------------------------------------------------------
# the two self-maps of the index set


@dataclass
class ComponentSelfMap:
    """A self-map of the component index set.

    Orbit branch: ``table[i]`` is the image index of component i.  Closed
    form: ``hom`` is the induced endomorphism of the index group.  For the
    flip map the fixed components and the freely swapped pairs are listed.
    """

    decomposition: ComponentDecomposition
    kind: str
    table: tuple = None
    hom: GroupHom = None
    formula: str = ""
    fixed_indices: tuple = None
    swapped_pairs: tuple = None
    fixed_subgroup: FinAbGroup = None
    fixed_incl: GroupHom = None

    def apply(self, i):
        if self.table is not None:
            return self.table[i]
        return self.hom(i)


def psi_on_components(d: ComponentDecomposition) -> ComponentSelfMap:
    """The squaring self-map [x, y] -> [x, yxy] of the index set.

    On the orbit branch the automorphism group of each source component is
    checked to land inside the automorphism group of its literal image pair.
    On the closed-form branch the map is the group endomorphism
    (s, z) -> (2s, [s] + z).
    """
    if d.method == "orbits":
        g = d.monoid
        table = []
        for i, (x, y) in enumerate(d.reps):
            target = (x, g.mul(g.mul(y, x), y))
            table.append(d.component_of[target])
            for gg in d.auts[i]:
                if _act_right(g, x, gg) != x or \
                        _act_left(g, gg, target[1]) != target[1]:
                    raise AssertionError(
                        "automorphisms do not include into the image"
                        " component")
        return ComponentSelfMap(decomposition=d, kind="psi",
                                table=tuple(table),
                                formula="[x,y] -> [x,yxy]")
    hom = _closed_form_hom(d, double_s=True)
    return ComponentSelfMap(decomposition=d, kind="psi", hom=hom,
                            formula="(s,z) -> (2s,[s]+z)")


def tau_on_components(d: ComponentDecomposition) -> ComponentSelfMap:
    """The flip involution [x, y] -> [y, x] of the index set, with its fixed
    components and freely swapped pairs."""
    if d.method == "orbits":
        table = tuple(d.component_of[(y, x)] for x, y in d.reps)
        for i, j in enumerate(table):
            if table[j] != i:
                raise AssertionError("the flip is not an involution")
        fixed = tuple(i for i, j in enumerate(table) if i == j)
        swapped = tuple((i, j) for i, j in enumerate(table) if i < j)
        return ComponentSelfMap(decomposition=d, kind="tau", table=table,
                                formula="[x,y] -> [y,x]",
                                fixed_indices=fixed, swapped_pairs=swapped)
    hom = _closed_form_hom(d, double_s=False)
    ident = GroupHom.identity(d.index_group)
    fixed_subgroup, incl = kernel(hom - ident)
    return ComponentSelfMap(decomposition=d, kind="tau", hom=hom,
                            formula="(s,z) -> (s,[s]+z)",
                            fixed_subgroup=fixed_subgroup, fixed_incl=incl)


def _closed_form_hom(d, double_s):
    """(s, z) -> (2s or s, [s] + z) as an endomorphism of the index group."""
    grp = d.monoid.group
    t = grp.ngens
    k = len(d.mod2_positions)
    images = []
    for j in range(d.index_group.ngens):
        raw = d.from_nf.column(j)
        s, z = list(raw[:t]), list(raw[t:])
        out_s = [2 * c for c in s] if double_s else list(s)
        out_z = [s[p] + z[a] for a, p in enumerate(d.mod2_positions)]
        images.append(d.index_group.normalize(d.to_nf.apply(out_s + out_z)))
    return GroupHom.from_images(d.index_group, d.index_group, images)


# ---------------------------------------------------------------------------
# the census for abelian groups


@dataclass
class AbelianBarReport:
    """Census of the component index set for an abelian group with trivial
    involution and no elements infinitely divisible by 2.

    The index set G x G/2 splits under the flip into the fixed part
    2G x G/2 and free orbit pairs.  The census counts the two kinds of
    summand labels of the assembled answer: one label per element of G/2
    (``type_one_count``) and one per free orbit over G minus 2G
    (``type_two_count``, None when G is infinite; each coset of 2G away
    from 0 carries ``type_two_per_coset`` orbits).
    """

    factors: tuple
    index_group: FinAbGroup
    aut_group: FinAbGroup
    fixed_group: FinAbGroup
    type_one_count: int
    type_two_count: object
    type_two_per_coset: int
    finite: bool


def abelian_report(g, token=None) -> AbelianBarReport:
    """Census of components, automorphisms and flip data for an abelian
    group with trivial involution, from invariant factors alone."""
    if isinstance(g, MonoidWithAntiInv):
        if g.group is None or not g.trivial_w:
            raise Refusal("the census needs an abelian group with trivial"
                          " involution")
        factors = g.group.invariants
    else:
        factors = presentation([int(d) for d in g])[0].invariants
    for d in factors:
        if d != 0 and max(_prime_factors(d), default=d) > 2:
            raise Refusal(
                f"invariant factor {d} has an odd part, so some elements"
                " are infinitely divisible by 2")
    mon = abelian_group(factors)
    dec = _components_closed_form(mon)
    grp = mon.group
    two_g = [d // 2 for d in factors]
    k = len(dec.mod2_positions)
    fixed_group = presentation(two_g + [2] * k)[0]
    type_one = 2 ** k
    finite = grp.is_finite()
    if finite:
        order = grp.order()
        two_g_order = 1
        for d in two_g:
            two_g_order *= d
        type_two = (order - two_g_order) * type_one // 2
    else:
        type_two = None
    return AbelianBarReport(factors=factors, index_group=dec.index_group,
                            aut_group=dec.aut_group, fixed_group=fixed_group,
                            type_one_count=type_one, type_two_count=type_two,
                            type_two_per_coset=type_one // 2, finite=finite)
