"""Finite commutative rings with anti-involution, and pro-ring towers.

A ring is stored as its additive group in invariant-factor normal form plus a
multiplication table on the normal-form generators; every other product is
recovered bilinearly.  Anti-involutions are additive maps that reverse (for us:
preserve, everything is commutative) multiplication and square to the
identity.

The text grammar accepted by :func:`parse_ring`:

    ring := "Z" | "Z/"INT | "GF("PRIME","POLY")" | ring"x"ring
          | ring"[C"INT"]" | "W"INT"("ring")"
    spec := ring [" with " ("trivial"|"galois"|"swap"|"inv")]

``POLY`` is a polynomial in x over the named prime field, e.g. ``x^2+x+1``.
``Z`` denotes the tower of rings Z/2^N with reduction transitions; everything
built on top of it is interpreted levelwise.  A ``[C k]`` postfix binds to the
atom it follows, and ``x`` is the (left-associative) product.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

from . import abelian
from ._errors import MuNotIsoError, ParseError, Refusal, StabilizationError, check_budget
from .abelian import (
    FinAbGroup,
    GroupHom,
    IntMatrix,
    cokernel,
    corestrict,
    image,
    kernel,
    presentation,
    quotient_by_elements,
    solve,
)


# ---------------------------------------------------------------------------
# finite rings


class FinRing:
    """Finite commutative ring on a normal-form additive group."""

    def __init__(self, group, one, gen_products, kind="raw", meta=None, spec_text=None):
        self.group = group
        self.one = group.normalize(one)
        self.gen_products = tuple(tuple(group.normalize(p) for p in row) for row in gen_products)
        if len(self.gen_products) != group.ngens or any(
            len(row) != group.ngens for row in self.gen_products
        ):
            raise ValueError("one product per generator pair")
        self.kind = kind
        self.meta = meta or {}
        self.spec_text = spec_text
        self._validate()

    # -- core arithmetic ----------------------------------------------------

    def zero(self):
        return self.group.zero()

    def add(self, x, y):
        return self.group.add(x, y)

    def neg(self, x):
        return self.group.neg(x)

    def sub(self, x, y):
        return self.group.add(x, self.group.neg(y))

    def scalar(self, c, x):
        return self.group.scalar(c, x)

    def mul(self, x, y):
        x = self.group.normalize(x)
        y = self.group.normalize(y)
        acc = self.group.zero()
        for i, xi in enumerate(x):
            if xi == 0:
                continue
            row = self.gen_products[i]
            for j, yj in enumerate(y):
                if yj == 0:
                    continue
                acc = self.group.add(acc, self.group.scalar(xi * yj, row[j]))
        return acc

    def pow(self, x, e):
        if e < 0:
            raise ValueError("negative powers are not defined here")
        acc = self.one
        base = self.group.normalize(x)
        while e:
            if e & 1:
                acc = self.mul(acc, base)
            e >>= 1
            if e:
                base = self.mul(base, base)
        return acc

    def elements(self):
        return self.group.elements()

    def order(self):
        return self.group.order()

    def char(self):
        return self.group.element_order(self.one)

    def describe(self):
        return self.spec_text or f"<ring on {self.group.describe()}>"

    # -- structure checks ---------------------------------------------------

    def _validate(self):
        g = self.group
        n = g.ngens
        units = [_unit(n, i) for i in range(n)]
        for i in range(n):
            if self.mul(self.one, units[i]) != units[i]:
                raise ValueError("unit element fails on a generator")
            for j in range(i, n):
                if self.gen_products[i][j] != self.gen_products[j][i]:
                    raise ValueError("multiplication table is not commutative")
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    left = self.mul(self.gen_products[i][j], units[k])
                    right = self.mul(units[i], self.gen_products[j][k])
                    if left != right:
                        raise ValueError("multiplication table is not associative")


def _unit(n, i):
    return tuple(1 if j == i else 0 for j in range(n))


def ring_from_raw(raw_factors, raw_one, raw_products, kind="raw", meta=None, spec_text=None):
    """Build a FinRing from a presentation on non-normal-form generators.

    ``raw_products[i][j]`` is the raw coordinate vector of the product of raw
    generators i and j.  Keeps the raw-to-normal-form charts in ``meta``.
    """
    group, to_nf, from_nf = presentation(raw_factors)
    t = len(raw_factors)

    def raw_mul(x, y):
        acc = [0] * t
        for i, xi in enumerate(x):
            if xi == 0:
                continue
            for j, yj in enumerate(y):
                if yj == 0:
                    continue
                prod = raw_products[i][j]
                for k in range(t):
                    acc[k] += xi * yj * prod[k]
        return _raw_normalize(raw_factors, acc)

    gen_products = []
    cols = [from_nf.column(i) for i in range(group.ngens)]
    for i in range(group.ngens):
        row = []
        for j in range(group.ngens):
            row.append(group.normalize(to_nf.apply(raw_mul(cols[i], cols[j]))))
        gen_products.append(row)
    one = group.normalize(to_nf.apply(_raw_normalize(raw_factors, raw_one)))
    meta = dict(meta or {})
    meta.update({"raw_factors": tuple(raw_factors), "to_nf": to_nf, "from_nf": from_nf})
    return FinRing(group, one, gen_products, kind=kind, meta=meta, spec_text=spec_text)


def _raw_normalize(factors, vec):
    return tuple(x % d if d else x for x, d in zip(vec, factors))


def zmod(n, spec_text=None):
    if n < 2:
        raise ParseError(f"Z/{n} is not a supported ring")
    group = FinAbGroup((n,))
    return FinRing(group, (1,), (((1,),),), kind="zmod",
                   meta={"n": n}, spec_text=spec_text or f"Z/{n}")


# -- polynomial helpers over prime fields -----------------------------------


def _poly_trim(c):
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return c


def _poly_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _poly_trim(out)


def _poly_mod(a, f, p):
    a = [x % p for x in a]
    a = _poly_trim(a)
    d = len(f) - 1
    while len(a) - 1 >= d:
        lead = a[-1]
        shift = len(a) - 1 - d
        for i in range(len(f)):
            a[shift + i] = (a[shift + i] - lead * f[i]) % p
        a = _poly_trim(a)
    return a

def _poly_is_irreducible(f, p):
    d = len(f) - 1
    if d < 1:
        return False
    max_deg = d // 2
    for deg in range(1, max_deg + 1):
        for tail in itertools.product(range(p), repeat=deg):
            g = list(tail) + [1]
            if _poly_trim(_poly_divrem(list(f), g, p)[1]) == []:
                return False
    return True


def _poly_divrem(a, b, p):
    a = [x % p for x in _poly_trim(a)]
    b = [x % p for x in _poly_trim(b)]
    binv = pow(b[-1], -1, p)
    q = [0] * max(len(a) - len(b) + 1, 0)
    while len(a) >= len(b) and a:
        shift = len(a) - len(b)
        c = (a[-1] * binv) % p
        q[shift] = c
        for i in range(len(b)):
            a[shift + i] = (a[shift + i] - c * b[i]) % p
        a = _poly_trim(a)
    return q, a


def gf(p, coeffs, spec_text=None):
    """Field with p^deg elements presented as F_p[x]/(f), f monic irreducible.

    ``coeffs`` are ascending: coeffs[i] multiplies x^i.
    """
    if not _is_prime(p):
        raise ParseError(f"{p} is not prime")
    coeffs = [c % p for c in coeffs]
    coeffs = _poly_trim(coeffs)
    if len(coeffs) < 2:
        raise ParseError("polynomial must have degree at least 1")
    if coeffs[-1] != 1:
        inv = pow(coeffs[-1], -1, p)
        coeffs = [(c * inv) % p for c in coeffs]
    d = len(coeffs) - 1
    if not _poly_is_irreducible(coeffs, p):
        raise ParseError("polynomial is reducible over the prime field")
    group = FinAbGroup((p,) * d)
    powers = [[0] * i + [1] for i in range(d)]
    table = {}
    cur = [1]
    for m in range(2 * d - 1):
        table[m] = _poly_mod(cur, coeffs, p)
        cur = _poly_mul(cur, [0, 1], p)
        cur = _poly_mod(cur, coeffs, p)
    gen_products = []
    for i in range(d):
        row = []
        for j in range(d):
            prod = table[i + j]
            row.append(tuple(prod[k] if k < len(prod) else 0 for k in range(d)))
        gen_products.append(row)
    one = tuple(1 if k == 0 else 0 for k in range(d))
    meta = {"p": p, "deg": d, "modulus": tuple(coeffs)}
    return FinRing(group, one, gen_products, kind="gf", meta=meta, spec_text=spec_text)


def _is_prime(n):
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def product(a: FinRing, b: FinRing, spec_text=None):
    fa = a.group.invariants
    fb = b.group.invariants
    na, nb = len(fa), len(fb)
    raw_factors = fa + fb
    t = na + nb

    def emb_a(x):
        return tuple(x[i] if i < na else 0 for i in range(t))

    def emb_b(y):
        return tuple(0 if i < na else y[i - na] for i in range(t))

    raw_products = [[None] * t for _ in range(t)]
    for i in range(t):
        for j in range(t):
            if i < na and j < na:
                raw_products[i][j] = emb_a(a.gen_products[i][j])
            elif i >= na and j >= na:
                raw_products[i][j] = emb_b(b.gen_products[i - na][j - na])
            else:
                raw_products[i][j] = (0,) * t
    raw_one = tuple(list(a.one) + list(b.one))
    meta = {"parts": (a, b), "split": na}
    return ring_from_raw(raw_factors, raw_one, raw_products, kind="product",
                         meta=meta, spec_text=spec_text)


def group_ring(a: FinRing, k: int, spec_text=None):
    """Group algebra a[C_k]; raw generator (t, i) is (generator i) * c^t."""
    if k < 1:
        raise ParseError("group ring needs a positive cyclic order")
    na = a.group.ngens
    fa = a.group.invariants
    t = na * k
    raw_factors = tuple(fa[i % na] for i in range(t))

    def slot(s, i):
        return s * na + i

    def emb(s, x):
        out = [0] * t
        for i, xi in enumerate(x):
            out[slot(s, i)] = xi
        return tuple(out)

    raw_products = [[None] * t for _ in range(t)]
    for s in range(k):
        for i in range(na):
            for u in range(k):
                for j in range(na):
                    raw_products[slot(s, i)][slot(u, j)] = emb((s + u) % k, a.gen_products[i][j])
    raw_one = emb(0, a.one)
    meta = {"base": a, "cyclic": k}
    return ring_from_raw(raw_factors, raw_one, raw_products, kind="groupring",
                         meta=meta, spec_text=spec_text)


def quotient_ring(a: FinRing, ideal_gens, spec_text=None):
    """Quotient of a by the ideal its listed elements generate.

    Returns ``(ring, proj, lifts)`` where proj is the additive projection and
    lifts are coordinate preimages of the quotient generators.
    """
    n = a.group.ngens
    sub = []
    for f in ideal_gens:
        f = a.group.normalize(f)
        sub.append(f)
        for i in range(n):
            sub.append(a.mul(_unit(n, i), f))
    q, proj = quotient_by_elements(a.group, sub)
    lifts = []
    for i in range(q.ngens):
        pre = solve(proj, _unit(q.ngens, i))
        if pre is None:
            raise AssertionError("projection is not surjective")
        lifts.append(pre)
    gen_products = []
    for i in range(q.ngens):
        row = []
        for j in range(q.ngens):
            row.append(proj(a.mul(lifts[i], lifts[j])))
        gen_products.append(row)
    ring = FinRing(q, proj(a.one), gen_products, kind="quotient",
                   meta={"base": a, "proj": proj, "lifts": tuple(lifts)},
                   spec_text=spec_text)
    return ring, proj, lifts


def subring_on_subgroup(a: FinRing, incl: GroupHom, kind="subring", spec_text=None):
    """Ring structure on a multiplicatively closed additive subgroup."""
    k = incl.source
    one = solve(incl, a.one)
    if one is None:
        raise ValueError("subgroup misses the unit")
    gen_products = []
    for i in range(k.ngens):
        row = []
        gi = incl(_unit(k.ngens, i))
        for j in range(k.ngens):
            gj = incl(_unit(k.ngens, j))
            prod = solve(incl, a.mul(gi, gj))
            if prod is None:
                raise ValueError("subgroup is not closed under multiplication")
            row.append(prod)
        gen_products.append(row)
    return FinRing(k, one, gen_products, kind=kind,
                   meta={"ambient": a, "incl": incl}, spec_text=spec_text)


# ---------------------------------------------------------------------------
# involutions


class InvRing:
    """Finite commutative ring with a ring involution."""

    def __init__(self, ring: FinRing, w: GroupHom, scheme="trivial", spec_text=None):
        if w.source != ring.group or w.target != ring.group:
            raise ValueError("involution must be an endomorphism of the ring group")
        self.ring = ring
        self.w = w
        self.scheme = scheme
        self.spec_text = spec_text or ring.spec_text
        n = ring.group.ngens
        if w(ring.one) != ring.one:
            raise ParseError("involution must fix 1")
        if w.compose(w) != GroupHom.identity(ring.group):
            raise ParseError("involution must square to the identity")
        for i in range(n):
            for j in range(n):
                lhs = w(ring.gen_products[i][j])
                rhs = ring.mul(w(_unit(n, i)), w(_unit(n, j)))
                if lhs != rhs:
                    raise ParseError("involution is not multiplicative")
        self._fixed = None

    def conj(self, x):
        return self.w(x)

    def fixed(self):
        if self._fixed is None:
            self._fixed = _fixed_subring(self)
        return self._fixed

    def describe(self):
        return self.spec_text or self.ring.describe()


@dataclass
class FixedSubring:
    """Fixed subring of an involution with transfer and norm."""

    ring: FinRing
    incl: GroupHom
    tr: GroupHom

    def norm(self, ambient: InvRing, a):
        v = ambient.ring.mul(a, ambient.w(a))
        out = solve(self.incl, v)
        if out is None:
            raise AssertionError("norm left the fixed subring")
        return out


def _fixed_subring(inv: InvRing) -> FixedSubring:
    a = inv.ring
    one_minus_w = GroupHom.identity(a.group) - inv.w
    k, incl = kernel(one_minus_w)
    ring = subring_on_subgroup(a, incl, kind="fixed",
                               spec_text=f"fixed({inv.describe()})")
    tr_ambient = GroupHom.identity(a.group) + inv.w
    tr = corestrict(tr_ambient, incl)
    return FixedSubring(ring=ring, incl=incl, tr=tr)


def fixed_subring(inv: InvRing):
    """Fixed subring with inclusion and additive transfer x -> x + w(x)."""
    f = inv.fixed()
    return f.ring, f.incl, f.tr


# ---------------------------------------------------------------------------
# Frobenius


@dataclass
class ElementMap:
    """A (possibly non-additive) self-map of a finite ring."""

    ring: FinRing
    fn: object
    additive: bool
    bijective: bool
    hom: GroupHom | None

    def __call__(self, x):
        return self.fn(x)


def frobenius(a: FinRing, p: int) -> ElementMap:
    """The p-th power map, with additivity and bijectivity flags."""
    fn = lambda x: a.pow(x, p)
    order = a.order()
    check_budget(order, "Frobenius bijectivity scan")
    seen = set()
    for x in a.elements():
        seen.add(fn(x))
    bijective = len(seen) == order
    additive = True
    check_budget(order * order, "Frobenius additivity scan")
    for x in a.elements():
        fx = fn(x)
        for y in a.elements():
            if fn(a.add(x, y)) != a.add(fx, fn(y)):
                additive = False
                break
        if not additive:
            break
    hom = None
    if additive:
        n = a.group.ngens
        hom = GroupHom.from_images(a.group, a.group, [fn(_unit(n, i)) for i in range(n)])
    return ElementMap(ring=a, fn=fn, additive=additive, bijective=bijective, hom=hom)


def is_perfect(a: FinRing, p: int) -> bool:
    fr = frobenius(a, p)
    return fr.additive and fr.bijective


# ---------------------------------------------------------------------------
# norm tensor ring


@dataclass
class NormTensor:
    """Tensor square of the fixed subring relative to norms, with mu."""

    ambient: InvRing
    fixed: FixedSubring
    ring: FinRing
    proj_from_plain_tensor: GroupHom
    mu: GroupHom
    section: GroupHom


def norm_tensor(inv: InvRing) -> NormTensor:
    fdata = inv.fixed()
    kring = fdata.ring
    kg = kring.group
    nk = kg.ngens
    check_budget(max(kg.order() ** 2, inv.ring.order()), "norm tensor construction")

    raw_factors = []
    for i in range(nk):
        for j in range(nk):
            raw_factors.append(_gcd(kg.invariants[i], kg.invariants[j]))
    t = nk * nk

    def rawidx(i, j):
        return i * nk + j

    def raw_tensor(x, y):
        out = [0] * t
        for i in range(nk):
            if x[i] == 0:
                continue
            for j in range(nk):
                if y[j] == 0:
                    continue
                out[rawidx(i, j)] = x[i] * y[j]
        return _raw_normalize(raw_factors, out)

    raw_products = [[None] * t for _ in range(t)]
    for i in range(nk):
        for j in range(nk):
            for u in range(nk):
                for v in range(nk):
                    left = kring.gen_products[i][u]
                    right = kring.gen_products[j][v]
                    raw_products[rawidx(i, j)][rawidx(u, v)] = raw_tensor(left, right)
    raw_one = raw_tensor(kring.one, kring.one)
    tensor = ring_from_raw(raw_factors, raw_one, raw_products, kind="tensor",
                           spec_text=f"tensor({kring.describe()})")
    to_nf = tensor.meta["to_nf"]

    def nf_tensor(x, y):
        return tensor.group.normalize(to_nf.apply(raw_tensor(x, y)))

    norms = set()
    for a in inv.ring.elements():
        norms.add(fdata.norm(inv, a))
    ideal = []
    for nu in sorted(norms):
        lhs = nf_tensor(kring.one, nu)
        rhs = nf_tensor(nu, kring.one)
        ideal.append(tensor.sub(lhs, rhs))
    qring, proj, lifts = quotient_ring(tensor, ideal,
                                       spec_text=f"normtensor({inv.describe()})")

    mu_raw_cols = []
    for i in range(nk):
        for j in range(nk):
            mu_raw_cols.append(kring.gen_products[i][j])
    from_nf = tensor.meta["from_nf"]
    mu_tensor_images = []
    for col in range(tensor.group.ngens):
        raw = from_nf.column(col)
        acc = kg.zero()
        for pos in range(t):
            if raw[pos]:
                acc = kg.add(acc, kg.scalar(raw[pos], mu_raw_cols[pos]))
        mu_tensor_images.append(acc)
    mu_tensor = GroupHom.from_images(tensor.group, kg, mu_tensor_images)
    mu = GroupHom.from_images(qring.group, kg, [mu_tensor(l) for l in lifts])
    if mu.compose(proj) != mu_tensor:
        raise AssertionError("multiplication map is not well defined on the quotient")

    section = GroupHom.from_images(
        kg, qring.group, [proj(nf_tensor(_unit(nk, i), kring.one)) for i in range(nk)]
    )
    if mu.compose(section) != GroupHom.identity(kg):
        raise AssertionError("section of the multiplication map failed")
    ker, _ = kernel(mu)
    for d in ker.invariants:
        if d == 0 or (d & (d - 1)) != 0:
            raise AssertionError("kernel of the multiplication map is not 2-power torsion")
    return NormTensor(ambient=inv, fixed=fdata, ring=qring,
                      proj_from_plain_tensor=proj, mu=mu, section=section)


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a)


def mu_is_iso(inv, depth=8):
    """Whether the multiplication map of the norm tensor ring is bijective.

    For a finite ring returns ``(flag, witness)``; the witness is None when
    the map is an isomorphism, else a dict with a nonzero kernel element.
    For a pro-ring the check runs levelwise until two consecutive levels agree.
    """
    if isinstance(inv, ProRing):
        prev = None
        for n in range(1, depth + 1):
            cur = mu_is_iso(inv.level(n))
            key = (cur[0], None if cur[1] is None else tuple(cur[1]["kernel"]))
            if prev is not None and prev[0] == key:
                return cur
            prev = (key, cur)
        raise StabilizationError(
            f"mu check did not stabilize within depth {depth} on {inv.describe()}"
        )
    nt = norm_tensor(inv)
    ker, incl = kernel(nt.mu)
    coker, _ = cokernel(nt.mu)
    if not coker.is_trivial():
        raise AssertionError("multiplication map must be surjective")
    if ker.is_trivial():
        return True, None
    gen = incl(_unit(ker.ngens, 0))
    witness = {
        "kernel": list(ker.invariants),
        "element": list(gen),
        "order": ker.invariants[0] if ker.invariants else 1,
    }
    return False, witness


# ---------------------------------------------------------------------------
# pro-rings


class ProRing:
    """Tower of involutive rings with ring-map transitions level+1 -> level."""

    def __init__(self, tag, level_fn, transition_fn, spec_text=None):
        self.tag = tag
        self._level_fn = level_fn
        self._transition_fn = transition_fn
        self.spec_text = spec_text or tag
        self._levels = {}
        self._transitions = {}

    def level(self, n) -> InvRing:
        if n < 1:
            raise ValueError("levels start at 1")
        if n not in self._levels:
            self._levels[n] = self._level_fn(n)
        return self._levels[n]

    def transition(self, n) -> GroupHom:
        """Additive hom from level(n+1) down to level(n); a ring map."""
        if n not in self._transitions:
            t = self._transition_fn(n, self.level(n + 1), self.level(n))
            _check_ring_map(self.level(n + 1), self.level(n), t)
            self._transitions[n] = t
        return self._transitions[n]

    def describe(self):
        return self.spec_text


def _check_ring_map(src: InvRing, tgt: InvRing, t: GroupHom):
    if t.source != src.ring.group or t.target != tgt.ring.group:
        raise ValueError("transition endpoints are wrong")
    if t(src.ring.one) != tgt.ring.one:
        raise ValueError("transition does not preserve 1")
    n = src.ring.group.ngens
    for i in range(n):
        for j in range(n):
            lhs = t(src.ring.gen_products[i][j])
            rhs = tgt.ring.mul(t(_unit(n, i)), t(_unit(n, j)))
            if lhs != rhs:
                raise ValueError("transition is not multiplicative")
    if t.compose(src.w) != tgt.w.compose(t):
        raise ValueError("transition does not commute with the involution")


def stabilize(values, induced, depth, what):
    """First level at which consecutive values agree via the induced map.

    ``values(n)`` produces a value, ``induced(n)`` a GroupHom (or list of
    GroupHoms) from level n+1 data to level n data that must be iso(s).
    Returns ``(n, values(n))``.
    """
    for n in range(1, depth + 1):
        maps = induced(n)
        if isinstance(maps, GroupHom):
            maps = [maps]
        if all(abelian.is_iso(m) for m in maps):
            return n, values(n)
    raise StabilizationError(f"{what} did not stabilize within depth {depth}")


# ---------------------------------------------------------------------------
# parsing


_ATOM_W = re.compile(r"^W(\d+)\(")
_POSTFIX = re.compile(r"^\[C(\d+)\]")


def parse_ring(text: str):
    """Parse a ring spec; returns an InvRing or a ProRing."""
    text = text.strip()
    if not text:
        raise ParseError("empty ring spec")
    main, sep, tail = text.partition(" with ")
    scheme = tail.strip() if sep else "trivial"
    if scheme not in ("trivial", "galois", "swap", "inv"):
        raise ParseError(f"unknown involution scheme: {scheme!r}")
    ast = _parse_product(main.strip())
    canon = _render(ast)
    spec_text = canon if scheme == "trivial" else f"{canon} with {scheme}"
    if _contains_tower(ast):
        def level_fn(n, _ast=ast, _scheme=scheme):
            fin = _build_finite(_substitute_tower(_ast, n))
            return _apply_scheme(fin, _scheme, spec_text=None)

        def transition_fn(n, upper, lower, _ast=ast):
            return _elem_transition(_ast, n, upper.ring, lower.ring)

        return ProRing(tag=canon, level_fn=level_fn, transition_fn=transition_fn,
                       spec_text=spec_text)
    ring = _build_finite(ast)
    return _apply_scheme(ring, scheme, spec_text=spec_text)


def _split_top(s, sep="x"):
    parts = []
    depth = 0
    cur = []
    for ch in s:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
            if depth < 0:
                raise ParseError(f"unbalanced brackets in {s!r}")
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if depth != 0:
        raise ParseError(f"unbalanced brackets in {s!r}")
    parts.append("".join(cur))
    return parts


def _parse_product(s):
    parts = _split_top(s)
    nodes = [_parse_atom(p.strip()) for p in parts]
    if any(n is None for n in nodes):
        raise ParseError(f"cannot parse ring spec {s!r}")
    if len(nodes) == 1:
        return nodes[0]
    return ("prod", nodes)


def _parse_atom(s):
    if not s:
        raise ParseError("empty factor in product")
    if s == "Z":
        return ("tower",)
    node = None
    rest = ""
    if s.startswith("Z/"):
        m = re.match(r"^Z/(\d+)", s)
        if not m:
            raise ParseError(f"bad modulus in {s!r}")
        node = ("zmod", int(m.group(1)))
        rest = s[m.end():]
    elif s.startswith("Z["):
        node = ("tower",)
        rest = s[1:]
    elif s.startswith("GF("):
        inner, rest = _matched(s[2:])
        args = _split_top(inner, ",")
        if len(args) != 2:
            raise ParseError(f"GF needs a prime and a polynomial: {s!r}")
        p = _int_or_error(args[0], "prime")
        coeffs = _parse_poly(args[1], p)
        node = ("gf", p, tuple(coeffs))
    else:
        m = _ATOM_W.match(s)
        if m:
            n = int(m.group(1))
            inner, rest = _matched(s[m.end() - 1:])
            node = ("witt", n, _parse_product(inner))
        else:
            raise ParseError(f"cannot parse ring atom {s!r}")
    while rest:
        m = _POSTFIX.match(rest)
        if not m:
            raise ParseError(f"trailing text {rest!r} after ring atom")
        node = ("cyc", node, int(m.group(1)))
        rest = rest[m.end():]
    return node


def _matched(s):
    """s starts with '('; return (inside, after)."""
    depth = 0
    for i, ch in enumerate(s):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0:
                return s[1:i], s[i + 1:]
    raise ParseError(f"unbalanced parentheses in {s!r}")


def _int_or_error(s, what):
    try:
        return int(s.strip())
    except ValueError as exc:
        raise ParseError(f"bad {what}: {s!r}") from exc


def _parse_poly(s, p):
    """Coefficients (ascending) of a polynomial in x over F_p."""
    s = s.replace(" ", "").replace("-", "+-")
    if not s:
        raise ParseError("empty polynomial")
    coeffs = {}
    for term in s.split("+"):
        if not term:
            continue
        m = re.match(r"^(-?\d*)\*?(x(?:\^(\d+))?)?$", term)
        if not m or (not m.group(1) and not m.group(2)):
            raise ParseError(f"bad polynomial term {term!r}")
        c = m.group(1)
        coeff = int(c) if c not in ("", "-") else (-1 if c == "-" else 1)
        if m.group(2):
            exp = int(m.group(3)) if m.group(3) else 1
        else:
            exp = 0
        coeffs[exp] = (coeffs.get(exp, 0) + coeff) % p
    deg = max(coeffs) if coeffs else 0
    return [coeffs.get(i, 0) for i in range(deg + 1)]


def _render(ast):
    kind = ast[0]
    if kind == "tower":
        return "Z"
    if kind == "zmod":
        return f"Z/{ast[1]}"
    if kind == "gf":
        return f"GF({ast[1]},{_render_poly(ast[2])})"
    if kind == "witt":
        return f"W{ast[1]}({_render(ast[2])})"
    if kind == "cyc":
        return f"{_render(ast[1])}[C{ast[2]}]"
    if kind == "prod":
        return "x".join(_render(n) for n in ast[1])
    raise AssertionError(kind)


def _render_poly(coeffs):
    terms = []
    for e in range(len(coeffs) - 1, -1, -1):
        c = coeffs[e]
        if c == 0:
            continue
        if e == 0:
            terms.append(str(c))
        elif e == 1:
            terms.append("x" if c == 1 else f"{c}*x")
        else:
            terms.append(f"x^{e}" if c == 1 else f"{c}*x^{e}")
    return "+".join(terms) if terms else "0"


def _contains_tower(ast):
    if ast[0] == "tower":
        return True
    if ast[0] == "witt":
        return _contains_tower(ast[2])
    if ast[0] == "cyc":
        return _contains_tower(ast[1])
    if ast[0] == "prod":
        return any(_contains_tower(n) for n in ast[1])
    return False


def _substitute_tower(ast, n):
    if ast[0] == "tower":
        return ("zmod", 2 ** n)
    if ast[0] == "witt":
        return ("witt", ast[1], _substitute_tower(ast[2], n))
    if ast[0] == "cyc":
        return ("cyc", _substitute_tower(ast[1], n), ast[2])
    if ast[0] == "prod":
        return ("prod", [_substitute_tower(x, n) for x in ast[1]])
    return ast


def _build_finite(ast) -> FinRing:
    kind = ast[0]
    if kind == "zmod":
        return zmod(ast[1])
    if kind == "gf":
        return gf(ast[1], list(ast[2]), spec_text=_render(ast))
    if kind == "witt":
        from . import witt as _witt

        base = _build_finite(ast[2])
        return _witt.witt_finring(base, _witt.char_prime(base), ast[1],
                                  spec_text=_render(ast))
    if kind == "cyc":
        return group_ring(_build_finite(ast[1]), ast[2], spec_text=_render(ast))
    if kind == "prod":
        rings = [_build_finite(n) for n in ast[1]]
        out = rings[0]
        for r in rings[1:]:
            out = product(out, r)
        out.spec_text = _render(ast)
        return out
    if kind == "tower":
        raise ParseError("the tower Z has no single finite level here")
    raise AssertionError(kind)


def _elem_transition(ast, n, upper: FinRing, lower: FinRing) -> GroupHom:
    """Transition hom level n+1 -> level n for a tower-containing spec."""
    fn = _elem_transition_fn(ast, n, upper, lower)
    g = upper.group.ngens
    images = [fn(_unit(g, i)) for i in range(g)]
    return GroupHom.from_images(upper.group, lower.group, images)


def _elem_transition_fn(ast, n, upper: FinRing, lower: FinRing):
    kind = ast[0]
    if kind == "tower":
        return lambda x: lower.group.normalize(x)
    if kind in ("zmod", "gf"):
        return lambda x: lower.group.normalize(x)
    if kind == "witt":
        from . import witt as _witt

        ub = upper.meta["base"]
        lb = lower.meta["base"]
        base_fn = _elem_transition_fn(ast[2], n, ub, lb)
        return _witt.witt_coordinatewise_fn(upper, lower, base_fn)
    if kind == "cyc":
        ub = upper.meta["base"]
        lb = lower.meta["base"]
        base_fn = _elem_transition_fn(ast[1], n, ub, lb)
        k = ast[2]

        def fn(x, _u=upper, _l=lower, _ub=ub, _lb=lb, _k=k, _base=base_fn):
            raw = _u.meta["from_nf"].apply(_u.group.normalize(x))
            raw = _raw_normalize(_u.meta["raw_factors"], raw)
            na = _ub.group.ngens
            out_raw = [0] * (_lb.group.ngens * _k)
            nb = _lb.group.ngens
            for s in range(_k):
                part = tuple(raw[s * na:(s + 1) * na])
                mapped = _base(_ub.group.normalize(part))
                for i, v in enumerate(mapped):
                    out_raw[s * nb + i] = v
            return _l.group.normalize(_l.meta["to_nf"].apply(
                _raw_normalize(_l.meta["raw_factors"], out_raw)))

        return fn
    if kind == "prod":
        parts = ast[1]

        def fn(x, _u=upper, _l=lower, _parts=parts, _n=n):
            uraw = _u.meta["from_nf"].apply(_u.group.normalize(x))
            uraw = list(_raw_normalize(_u.meta["raw_factors"], uraw))
            # walk the left-associated product structure
            uparts = _flatten_product(_u)
            lparts = _flatten_product(_l)
            out_raw = []
            off = 0
            for node, up, lp in zip(_parts, uparts, lparts):
                na = up.group.ngens
                sub = up.group.normalize(tuple(uraw[off:off + na]))
                off += na
                mapped = _elem_transition_fn(node, _n, up, lp)(sub)
                out_raw.extend(mapped)
            return _l.group.normalize(_l.meta["to_nf"].apply(
                _raw_normalize(_l.meta["raw_factors"], tuple(out_raw))))

        return fn
    raise AssertionError(kind)


def _flatten_product(ring: FinRing):
    """Factors of a left-associated product ring, in order."""
    if ring.kind != "product":
        return [ring]
    a, b = ring.meta["parts"]
    return _flatten_product(a) + [b]


def _apply_scheme(ring: FinRing, scheme: str, spec_text=None) -> InvRing:
    w = _involution_hom(ring, scheme)
    return InvRing(ring, w, scheme=scheme, spec_text=spec_text)


def _involution_hom(ring: FinRing, scheme: str) -> GroupHom:
    n = ring.group.ngens
    if scheme == "trivial":
        return GroupHom.identity(ring.group)
    if scheme == "galois":
        return _galois_hom(ring)
    if scheme == "swap":
        if ring.kind != "product":
            raise ParseError("swap needs a product ring")
        a, b = ring.meta["parts"]
        if a.group.invariants != b.group.invariants or a.gen_products != b.gen_products:
            raise ParseError("swap needs two identical factors")
        na = a.group.ngens

        def raw_swap(raw):
            return tuple(list(raw[na:]) + list(raw[:na]))

        return _hom_via_raw(ring, raw_swap)
    if scheme == "inv":
        if ring.kind != "groupring":
            raise ParseError("inv needs a group ring")
        base = ring.meta["base"]
        k = ring.meta["cyclic"]
        na = base.group.ngens

        def raw_inv(raw):
            out = [0] * len(raw)
            for s in range(k):
                for i in range(na):
                    out[((k - s) % k) * na + i] = raw[s * na + i]
            return tuple(out)

        return _hom_via_raw(ring, raw_inv)
    raise ParseError(f"unknown involution scheme: {scheme!r}")


def _galois_hom(ring: FinRing) -> GroupHom:
    if ring.kind == "gf":
        p = ring.meta["p"]
        d = ring.meta["deg"]
        if d % 2 != 0:
            raise ParseError(
                "galois involution needs a degree-2 extension structure; "
                f"{ring.describe()} has odd degree"
            )
        e = p ** (d // 2)
        n = ring.group.ngens
        images = [ring.pow(_unit(n, i), e) for i in range(n)]
        return GroupHom.from_images(ring.group, ring.group, images)
    if ring.kind == "zmod":
        raise ParseError("galois involution is not defined on Z/n")
    if ring.kind == "product":
        a, b = ring.meta["parts"]
        wa = _galois_hom(a)
        wb = _galois_hom(b)

        def raw_map(raw):
            na = a.group.ngens
            xa = wa(a.group.normalize(tuple(raw[:na])))
            xb = wb(b.group.normalize(tuple(raw[na:])))
            return tuple(list(xa) + list(xb))

        return _hom_via_raw(ring, raw_map)
    if ring.kind == "witt":
        from . import witt as _witt

        base = ring.meta["base"]
        wbase = _galois_hom(base)
        fn = _witt.witt_coordinatewise_fn(ring, ring, lambda x: wbase(x))
        n = ring.group.ngens
        return GroupHom.from_images(ring.group, ring.group,
                                    [fn(_unit(n, i)) for i in range(n)])
    raise ParseError(f"galois involution is not defined on {ring.describe()}")


def _hom_via_raw(ring: FinRing, raw_map) -> GroupHom:
    to_nf = ring.meta["to_nf"]
    from_nf = ring.meta["from_nf"]
    factors = ring.meta["raw_factors"]
    images = []
    for i in range(ring.group.ngens):
        raw = _raw_normalize(factors, from_nf.column(i))
        mapped = _raw_normalize(factors, raw_map(raw))
        images.append(ring.group.normalize(to_nf.apply(mapped)))
    return GroupHom.from_images(ring.group, ring.group, images)


# ---------------------------------------------------------------------------
# ready-made towers


def two_adic_tower() -> ProRing:
    """The tower Z/2^N with reduction maps and trivial involution."""
    return parse_ring("Z")


def witt_tower(base: FinRing, spec_text=None) -> ProRing:
    """Tower W_N(base; 2) with restriction transitions, trivial involution."""
    from . import witt as _witt

    def level_fn(n):
        ring = _witt.witt_finring(base, 2, n,
                                  spec_text=f"W{n}({base.describe()})")
        return InvRing(ring, GroupHom.identity(ring.group), scheme="trivial",
                       spec_text=ring.spec_text)

    def transition_fn(n, upper, lower):
        return _witt.witt_restriction_hom(upper.ring, lower.ring)

    tag = spec_text or f"W({base.describe()})"
    return ProRing(tag=tag, level_fn=level_fn, transition_fn=transition_fn,
                   spec_text=tag)
