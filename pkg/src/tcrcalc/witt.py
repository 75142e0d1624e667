"""Truncated p-typical Witt vectors over finite commutative rings.

The ring W_n(A;p) lives on n-tuples of A-elements.  Its addition,
multiplication, negation, and Frobenius are given by universal integer
polynomials determined by the ghost components

    w_i(a) = sum_{j<=i} p^j * a_j^(p^(i-j)),

solved once per (p, n) by exact integer division and cached.  Polynomials are
stored as dense exponent-vector maps {exponent tuple: coefficient}; the
supported envelope is p <= 3 and n <= 6, past which coefficient growth makes
the construction unreasonable.

Element-level arithmetic runs over lookup tables indexed by base-ring
elements, so bulk identity checks evaluate the polynomials once over numpy
index arrays instead of looping.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field

import numpy as np

from ._errors import Refusal, check_budget
from .abelian import GroupHom, group_from_addition

MAX_PRIME = 3
MAX_LENGTH = 6


# ---------------------------------------------------------------------------
# integer polynomials as {exponent vector: coefficient}


def _padd(f, g, scale=1):
    out = dict(f)
    for m, c in g.items():
        v = out.get(m, 0) + scale * c
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def _pmul(f, g):
    out = {}
    for m1, c1 in f.items():
        for m2, c2 in g.items():
            m = tuple(x + y for x, y in zip(m1, m2))
            v = out.get(m, 0) + c1 * c2
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return out


def _ppow(f, e, nv):
    acc = {(0,) * nv: 1}
    base = f
    while e:
        if e & 1:
            acc = _pmul(acc, base)
        e >>= 1
        if e:
            base = _pmul(base, base)
    return acc


def _ghost(nv, offset, i, p):
    out = {}
    for j in range(i + 1):
        m = [0] * nv
        m[offset + j] = p ** (i - j)
        out[tuple(m)] = p ** j
    return out


def _exact_div(f, d):
    out = {}
    for m, c in f.items():
        q, r = divmod(c, d)
        if r:
            raise RuntimeError("ghost identities produced a non-integral coefficient")
        out[m] = q
    return out


def _compile(f):
    terms = []
    for m, c in sorted(f.items()):
        factors = tuple((v, e) for v, e in enumerate(m) if e)
        terms.append((c, factors))
    return tuple(terms)


@dataclass(frozen=True)
class WittPolySet:
    """Structure polynomials for W_n(-;p), compiled to term lists.

    Sum/product/negation polynomials use variables 0..n-1 for the first
    argument and n..2n-1 for the second; negation and Frobenius use 0..n-1.
    The Frobenius list has n-1 entries and lands in W_{n-1}.
    """

    p: int
    n: int
    sum_polys: tuple
    prod_polys: tuple
    neg_polys: tuple
    frob_polys: tuple


_POLY_CACHE = {}
_POLY_LOCK = threading.Lock()


def build_polys(p, n) -> WittPolySet:
    """Solve the ghost identities for the (p, n) structure polynomials."""
    if p not in (2, 3):
        if p < 2 or any(p % q == 0 for q in range(2, p)):
            raise Refusal(f"{p} is not prime")
        raise Refusal(f"p={p} is outside the supported envelope (p <= {MAX_PRIME})")
    if not 1 <= n <= MAX_LENGTH:
        raise Refusal(f"length {n} is outside the supported envelope (1..{MAX_LENGTH})")
    with _POLY_LOCK:
        if (p, n) in _POLY_CACHE:
            return _POLY_CACHE[(p, n)]
        nv2 = 2 * n
        sums, prods = [], []
        for i in range(n):
            ga = _ghost(nv2, 0, i, p)
            gb = _ghost(nv2, n, i, p)
            rhs_s = _padd(ga, gb)
            rhs_p = _pmul(ga, gb)
            for j in range(i):
                rhs_s = _padd(rhs_s, _ppow(sums[j], p ** (i - j), nv2), scale=-(p ** j))
                rhs_p = _padd(rhs_p, _ppow(prods[j], p ** (i - j), nv2), scale=-(p ** j))
            sums.append(_exact_div(rhs_s, p ** i))
            prods.append(_exact_div(rhs_p, p ** i))
        negs = []
        for i in range(n):
            rhs = _padd({}, _ghost(n, 0, i, p), scale=-1)
            for j in range(i):
                rhs = _padd(rhs, _ppow(negs[j], p ** (i - j), n), scale=-(p ** j))
            negs.append(_exact_div(rhs, p ** i))
        frobs = []
        for i in range(n - 1):
            rhs = _ghost(n, 0, i + 1, p)
            for j in range(i):
                rhs = _padd(rhs, _ppow(frobs[j], p ** (i - j), n), scale=-(p ** j))
            frobs.append(_exact_div(rhs, p ** i))
        out = WittPolySet(
            p=p,
            n=n,
            sum_polys=tuple(_compile(f) for f in sums),
            prod_polys=tuple(_compile(f) for f in prods),
            neg_polys=tuple(_compile(f) for f in negs),
            frob_polys=tuple(_compile(f) for f in frobs),
        )
        _POLY_CACHE[(p, n)] = out
        return out


# ---------------------------------------------------------------------------
# table-driven base-ring arithmetic


class TableRing:
    """Finite ring arithmetic on integer indices with numpy lookup tables."""

    def __init__(self, ring):
        self.ring = ring
        self.elements = list(ring.elements())
        self.index = {e: i for i, e in enumerate(self.elements)}
        m = len(self.elements)
        self.size = m
        add = np.empty((m, m), dtype=np.int64)
        mul = np.empty((m, m), dtype=np.int64)
        for i, x in enumerate(self.elements):
            for j, y in enumerate(self.elements):
                add[i, j] = self.index[ring.add(x, y)]
                mul[i, j] = self.index[ring.mul(x, y)]
        self.add = add
        self.mul = mul
        self.zero_idx = self.index[ring.zero()]
        self.one_idx = self.index[ring.one]
        self.char = ring.char()
        self._scalars = {}

    def scalar_map(self, c):
        c %= self.char
        if c not in self._scalars:
            out = np.full(self.size, self.zero_idx, dtype=np.int64)
            base = np.arange(self.size, dtype=np.int64)
            for _ in range(c):
                out = self.add[out, base]
            self._scalars[c] = out
        return self._scalars[c]

    def pow_apply(self, arr, e):
        acc = None
        base = arr
        while e:
            if e & 1:
                acc = base if acc is None else self.mul[acc, base]
            e >>= 1
            if e:
                base = self.mul[base, base]
        if acc is None:
            return np.full_like(arr, self.one_idx)
        return acc


_TABLE_CACHE = {}


def table_ring(ring) -> TableRing:
    key = id(ring)
    hit = _TABLE_CACHE.get(key)
    if hit is not None and hit[0] is ring:
        return hit[1]
    t = TableRing(ring)
    _TABLE_CACHE[key] = (ring, t)
    return t


# ---------------------------------------------------------------------------
# the Witt ring on index tuples


class WittRing:
    """W_n(A;p) on n-tuples of base-element indices (ints or numpy arrays)."""

    def __init__(self, base_ring, p, n):
        self.base_ring = base_ring
        self.table = table_ring(base_ring)
        self.p = p
        self.n = n
        self.polys = build_polys(p, n)
        char = self.table.char
        self._sum = [self._reduce(t, char) for t in self.polys.sum_polys]
        self._prod = [self._reduce(t, char) for t in self.polys.prod_polys]
        self._neg = [self._reduce(t, char) for t in self.polys.neg_polys]
        self._frob = [self._reduce(t, char) for t in self.polys.frob_polys]
        self.zero = (self.table.zero_idx,) * n
        self.one = self.teichmuller(self.table.one_idx)

    @staticmethod
    def _reduce(terms, char):
        return tuple((c % char, f) for c, f in terms if c % char)

    def _eval(self, terms, args):
        t = self.table
        arrs = [np.asarray(a, dtype=np.int64) for a in args]
        scalar_in = all(a.ndim == 0 for a in arrs)
        shape = np.broadcast_shapes(*(a.shape for a in arrs))
        acc = np.full(shape, t.zero_idx, dtype=np.int64)
        for coeff, factors in terms:
            term = np.full(shape, t.one_idx, dtype=np.int64)
            for var, e in factors:
                term = t.mul[term, t.pow_apply(arrs[var], e)]
            term = t.scalar_map(coeff)[term]
            acc = t.add[acc, term]
        return int(acc) if scalar_in else acc

    def add(self, x, y):
        args = tuple(x) + tuple(y)
        return tuple(self._eval(tm, args) for tm in self._sum)

    def mul(self, x, y):
        args = tuple(x) + tuple(y)
        return tuple(self._eval(tm, args) for tm in self._prod)

    def neg(self, x):
        return tuple(self._eval(tm, tuple(x)) for tm in self._neg)

    def frobenius(self, x):
        """F: W_n -> W_{n-1}."""
        return tuple(self._eval(tm, tuple(x)) for tm in self._frob)

    def verschiebung(self, x):
        """V: W_{n-1} -> W_n, shift by one slot."""
        pad = np.full_like(np.asarray(x[0]), self.table.zero_idx) if not isinstance(x[0], int) \
            else self.table.zero_idx
        return (pad,) + tuple(x)

    def restriction(self, x):
        """R: W_n -> W_{n-1}, drop the last coordinate."""
        return tuple(x)[: self.n - 1]

    def teichmuller(self, a_idx):
        return (a_idx,) + (self.table.zero_idx,) * (self.n - 1)

    def ghost(self, x):
        """All ghost components, computed in the base ring."""
        t = self.table
        out = []
        for i in range(self.n):
            arrs = [np.asarray(a, dtype=np.int64) for a in x]
            scalar_in = all(a.ndim == 0 for a in arrs)
            shape = np.broadcast_shapes(*(a.shape for a in arrs))
            acc = np.full(shape, t.zero_idx, dtype=np.int64)
            for j in range(i + 1):
                term = t.pow_apply(arrs[j], self.p ** (i - j))
                term = t.scalar_map(self.p ** j)[term]
                acc = t.add[acc, term]
            out.append(int(acc) if scalar_in else acc)
        return tuple(out)

    def scalar(self, c, x):
        acc = self.zero if isinstance(x[0], int) else tuple(
            np.full_like(np.asarray(a), self.table.zero_idx) for a in x)
        for _ in range(c):
            acc = self.add(acc, x)
        return acc

    def all_vectors(self):
        check_budget(self.table.size ** self.n, "Witt vector enumeration")
        return itertools.product(range(self.table.size), repeat=self.n)

    def all_vectors_bulk(self):
        """Component arrays covering every vector once."""
        m = self.table.size
        total = m ** self.n
        check_budget(total, "Witt vector enumeration")
        idx = np.arange(total, dtype=np.int64)
        comps = []
        for i in range(self.n):
            comps.append((idx // (m ** i)) % m)
        return tuple(comps)


_WRING_CACHE = {}


def witt_ring(base_ring, p, n) -> WittRing:
    key = (id(base_ring), p, n)
    hit = _WRING_CACHE.get(key)
    if hit is not None and hit[0] is base_ring:
        return hit[1]
    w = WittRing(base_ring, p, n)
    _WRING_CACHE[key] = (base_ring, w)
    return w


# ---------------------------------------------------------------------------
# Witt vectors as first-class values


@dataclass(frozen=True)
class WittVector:
    ring: WittRing = field(compare=False)
    coords: tuple

    def __post_init__(self):
        if len(self.coords) != self.ring.n:
            raise ValueError("coordinate length must match the truncation")

    def as_elements(self):
        base = self.ring.table
        return [list(base.elements[i]) for i in self.coords]


def witt_vector(ring: WittRing, base_elements) -> WittVector:
    idxs = []
    for e in base_elements:
        idxs.append(ring.table.index[ring.base_ring.group.normalize(tuple(e))])
    return WittVector(ring=ring, coords=tuple(idxs))


def witt_add(x: WittVector, y: WittVector) -> WittVector:
    if x.ring is not y.ring:
        raise ValueError("summands live in different Witt rings")
    return WittVector(ring=x.ring, coords=x.ring.add(x.coords, y.coords))


def witt_mul(x: WittVector, y: WittVector) -> WittVector:
    if x.ring is not y.ring:
        raise ValueError("factors live in different Witt rings")
    return WittVector(ring=x.ring, coords=x.ring.mul(x.coords, y.coords))


def frobenius_map(x: WittVector) -> WittVector:
    lower = witt_ring(x.ring.base_ring, x.ring.p, x.ring.n - 1)
    return WittVector(ring=lower, coords=x.ring.frobenius(x.coords))


def verschiebung(x: WittVector) -> WittVector:
    upper = witt_ring(x.ring.base_ring, x.ring.p, x.ring.n + 1)
    return WittVector(ring=upper, coords=(x.ring.table.zero_idx,) + x.coords)


def restriction(x: WittVector) -> WittVector:
    lower = witt_ring(x.ring.base_ring, x.ring.p, x.ring.n - 1)
    return WittVector(ring=lower, coords=x.coords[:-1])


def teichmuller(ring: WittRing, base_element) -> WittVector:
    idx = ring.table.index[ring.base_ring.group.normalize(tuple(base_element))]
    return WittVector(ring=ring, coords=ring.teichmuller(idx))


# ---------------------------------------------------------------------------
# additive structure and charts


@dataclass
class WittStructure:
    """Additive normal form of W_n(A;p) with a coordinate chart."""

    base_ring: object
    p: int
    n: int
    wring: WittRing
    chart: object

    @property
    def group(self):
        return self.chart.group


_STRUCT_CACHE = {}


def witt_structure(base_ring, p, n) -> WittStructure:
    key = (id(base_ring), p, n)
    hit = _STRUCT_CACHE.get(key)
    if hit is not None and hit[0] is base_ring:
        return hit[1]
    wring = witt_ring(base_ring, p, n)
    elements = list(wring.all_vectors())
    chart = group_from_addition(elements, wring.add, wring.zero,
                                what=f"W_{n} additive structure")
    s = WittStructure(base_ring=base_ring, p=p, n=n, wring=wring, chart=chart)
    _STRUCT_CACHE[key] = (base_ring, s)
    return s


def restriction_hom(base_ring, p, n) -> GroupHom:
    """R: W_n -> W_{n-1} on normal-form coordinates."""
    hi = witt_structure(base_ring, p, n)
    lo = witt_structure(base_ring, p, n - 1)
    return hi.chart.hom_to(lo.chart, lambda x: x[: n - 1])


def frobenius_hom(base_ring, p, n) -> GroupHom:
    """F: W_n -> W_{n-1} on normal-form coordinates."""
    hi = witt_structure(base_ring, p, n)
    lo = witt_structure(base_ring, p, n - 1)
    return hi.chart.hom_to(lo.chart, hi.wring.frobenius)


def verschiebung_hom(base_ring, p, n) -> GroupHom:
    """V: W_{n-1} -> W_n on normal-form coordinates."""
    hi = witt_structure(base_ring, p, n)
    lo = witt_structure(base_ring, p, n - 1)
    return lo.chart.hom_to(hi.chart, lambda x: (hi.wring.table.zero_idx,) + tuple(x))


# ---------------------------------------------------------------------------
# Witt rings as FinRings (for the ring grammar and towers)


def char_prime(ring) -> int:
    c = ring.char()
    if c is None or c < 2:
        raise Refusal("Witt vectors here need a base ring of prime-power characteristic")
    q = 2
    while c % q:
        q += 1
    m = c
    while m % q == 0:
        m //= q
    if m != 1:
        raise Refusal(f"characteristic {c} is not a prime power")
    return q


def witt_finring(base_ring, p, n, spec_text=None):
    from .ringkit import FinRing

    s = witt_structure(base_ring, p, n)
    chart = s.chart
    group = chart.group
    g = group.ngens
    gen_products = []
    for i in range(g):
        row = []
        for j in range(g):
            prod = s.wring.mul(chart.gen_elements[i], chart.gen_elements[j])
            row.append(chart.coords(prod))
        gen_products.append(row)
    one = chart.coords(s.wring.one)
    meta = {"base": base_ring, "p": p, "n": n, "structure": s}
    return FinRing(group, one, gen_products, kind="witt", meta=meta,
                   spec_text=spec_text)


def witt_coordinatewise_fn(upper_fr, lower_fr, base_coord_fn):
    """Apply a base-ring map in every Witt coordinate, in chart coordinates."""
    su = upper_fr.meta["structure"]
    sl = lower_fr.meta["structure"]

    def fn(coords):
        vec = su.chart.element(tuple(coords))
        out = []
        for idx in vec:
            bc = su.wring.table.elements[idx]
            lc = sl.wring.base_ring.group.normalize(tuple(base_coord_fn(bc)))
            out.append(sl.wring.table.index[lc])
        return sl.chart.coords(tuple(out))

    return fn


def witt_restriction_hom(upper_fr, lower_fr) -> GroupHom:
    """R between Witt FinRings over the same base."""
    su = upper_fr.meta["structure"]
    sl = lower_fr.meta["structure"]
    images = []
    for i in range(upper_fr.group.ngens):
        images.append(sl.chart.coords(su.chart.gen_elements[i][: sl.n]))
    return GroupHom.from_images(upper_fr.group, lower_fr.group, images)


# ---------------------------------------------------------------------------
# exhaustive identity verification


def verify_core_identities(base_ring, p, n_max) -> dict:
    """Exhaustively check the defining identities of F, V, R, and ghosts.

    Checks, over every element (or pair) at each length up to n_max:
    FV = p, V(F(x)y) = xV(y), RF = FR, RV = VR, ghost additivity and
    multiplicativity, and multiplicativity of the Teichmueller lift.
    Returns a dict of checked-case counts; raises AssertionError on failure.
    """
    counts = {}
    t = table_ring(base_ring)
    m = t.size

    for n in range(2, n_max + 1):
        wn = witt_ring(base_ring, p, n)
        wm = witt_ring(base_ring, p, n - 1)

        ys = wm.all_vectors_bulk()
        fv = wn.frobenius(wn.verschiebung(ys))
        py = wm.scalar(p, ys)
        if not all(np.array_equal(a, b) for a, b in zip(fv, py)):
            raise AssertionError(f"FV = {p} fails at length {n}")
        counts[f"FV=p @ n={n}"] = m ** (n - 1)

        xs = wn.all_vectors_bulk()
        col = tuple(c.reshape(-1, 1) for c in xs)
        row = tuple(c.reshape(1, -1) for c in ys)
        lhs = wn.verschiebung(wm.mul(wn.frobenius(col), row))
        rhs = wn.mul(col, wn.verschiebung(row))
        if not all(np.array_equal(a, b) for a, b in zip(lhs, rhs)):
            raise AssertionError(f"projection formula fails at length {n}")
        counts[f"V(F(x)y)=xV(y) @ n={n}"] = m ** (2 * n - 1)

        if n >= 3:
            rf = wm.restriction(wn.frobenius(xs))
            wr = witt_ring(base_ring, p, n - 1)
            fr = wr.frobenius(wn.restriction(xs))
            if not all(np.array_equal(a, b) for a, b in zip(rf, fr)):
                raise AssertionError(f"RF = FR fails at length {n}")
            counts[f"RF=FR @ n={n}"] = m ** n

            rv = wn.restriction(wn.verschiebung(ys))
            vr = (np.full_like(ys[0], t.zero_idx),) + tuple(ys[: n - 2])
            if not all(np.array_equal(a, b) for a, b in zip(rv, vr)):
                raise AssertionError(f"RV = VR fails at length {n}")
            counts[f"RV=VR @ n={n}"] = m ** (n - 1)

        xcol = tuple(c.reshape(-1, 1) for c in xs)
        xrow = tuple(c.reshape(1, -1) for c in xs)
        s = wn.add(xcol, xrow)
        gs = wn.ghost(s)
        gx = wn.ghost(xcol)
        gy = wn.ghost(xrow)
        for i in range(n):
            if not np.array_equal(gs[i], t.add[gx[i], gy[i]]):
                raise AssertionError(f"ghost additivity fails at n={n}, i={i}")
        pr = wn.mul(xcol, xrow)
        gp = wn.ghost(pr)
        for i in range(n):
            if not np.array_equal(gp[i], t.mul[gx[i], gy[i]]):
                raise AssertionError(f"ghost multiplicativity fails at n={n}, i={i}")
        counts[f"ghost naturality @ n={n}"] = 2 * n * m ** (2 * n)

        a = np.arange(m, dtype=np.int64).reshape(-1, 1)
        b = np.arange(m, dtype=np.int64).reshape(1, -1)
        ta = wn.teichmuller(a)
        tb = wn.teichmuller(b)
        tab = wn.teichmuller(t.mul[a, b])
        if not all(np.all(np.asarray(x) == np.asarray(y))
                   for x, y in zip(wn.mul(ta, tb), tab)):
            raise AssertionError(f"Teichmueller lift is not multiplicative at n={n}")
        counts[f"[a][b]=[ab] @ n={n}"] = m * m

    return counts
