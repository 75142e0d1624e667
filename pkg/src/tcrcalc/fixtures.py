"""Frozen example computations, run end to end against the library.

Each fixture in ``fixtures.json`` names an operation, its arguments, and
the expected result.  Expected values are matched as a recursive
sub-structure of the computed payload, so a fixture asserts exactly the
facts it records and nothing else.  ``run_fixtures`` executes the entries
in file order and reports one result per fixture; the whole file is meant
to run in well under five minutes and to produce identical results on
every run.
"""

import json
import time
from dataclasses import dataclass
from pathlib import Path

from ._errors import ParseError, poll
from .abelian import (TRIVIAL, GroupHom, Z, cyclic, direct_sum,
                      graded_kernel_of_difference, image, kernel)
from . import barcalc, mackey, ringkit, tcr

__all__ = ["FixtureResult", "load_fixtures", "run_fixtures"]

_FIXTURE_PATH = Path(__file__).with_name("fixtures.json")

_REGISTRY = {}


def _op(name):
    def deco(fn):
        _REGISTRY[name] = fn
        return fn
    return deco


# ---------------------------------------------------------------------------
# shared helpers


def _graded_payload(gg):
    lo, hi = gg.window
    groups = {str(d): list(gg.groups.get(d, TRIVIAL).invariants)
              for d in range(lo, hi + 1)}
    return {"window": [lo, hi], "groups": groups}


def _plain_ring(spec):
    return tcr._plain(ringkit.parse_ring(spec))


def _inv_ring(spec):
    ring = ringkit.parse_ring(spec)
    if not isinstance(ring, ringkit.InvRing):
        raise ParseError(f"{spec!r} does not name a finite ring with"
                         " involution")
    return ring


def _log_order(base, order):
    rank = 0
    while base ** rank < order:
        rank += 1
    if base ** rank != order:
        raise AssertionError(f"order {order} is not a power of {base}")
    return rank


# ---------------------------------------------------------------------------
# operations


@_op("artin-schreier-kernel")
def _artin_schreier_kernel(args, token):
    m = int(args["modulus"])
    gm = cyclic(m)
    g2 = cyclic(2)
    h = GroupHom.from_images(gm, g2, [((1 + 1 * 1) % 2,)])
    for x in gm.elements():
        if h(x) != ((x[0] + x[0] * x[0]) % 2,):
            raise AssertionError("x + x^2 is not additive modulo 2")
    ker, _ = kernel(h)
    return {"kernel": list(ker.invariants)}


@_op("bredon-sphere")
def _bredon_sphere(args, token):
    coeff = args["coefficients"]
    if coeff == "Z":
        m = mackey.constant_mackey(Z)
    elif coeff == "two-torsion-pair":
        m = mackey.two_torsion_pair_mackey()
    else:
        m = mackey.constant_mackey(_plain_ring(coeff).group)
    return _graded_payload(mackey.rep_sphere_homotopy(m, int(args["weight"])))


@_op("norm-cofiber")
def _norm_cofiber(args, token):
    return _graded_payload(mackey.norm_cofiber_homotopy(int(args["weight"])))


@_op("fixed-rows-difference")
def _fixed_rows_difference(args, token):
    d = int(args["degree"])
    ring, sqrt = tcr._require_perfect_field(ringkit.parse_ring(args["ring"]))
    model = tcr._ClosedModel(ring, sqrt)
    out = graded_kernel_of_difference({d: model.rfix(d)},
                                      {d: model.fmap(d)}, [d])
    ker, cok = out[d]
    return {"kernel": list(ker.invariants), "cokernel": list(cok.invariants)}


@_op("norm-tensor")
def _norm_tensor(args, token):
    inv = _inv_ring(args["ring"])
    nt = ringkit.norm_tensor(inv)
    flag, _ = ringkit.mu_is_iso(inv)
    return {"ring_invariants": list(nt.ring.group.invariants),
            "mu_iso": flag}


@_op("mu")
def _mu(args, token):
    flag, witness = ringkit.mu_is_iso(ringkit.parse_ring(args["ring"]))
    payload = {"mu_iso": flag}
    if witness is not None:
        payload["witness_kernel"] = list(witness["kernel"])
    return payload


@_op("mackey-fixed-level")
def _mackey_fixed_level(args, token):
    m = mackey.two_torsion_pair_mackey()
    return {"fixed": list(m.fixed.invariants),
            "underlying": list(m.underlying.invariants)}


@_op("tower-degree")
def _tower_degree(args, token):
    k = ringkit.parse_ring(args["ring"])
    d = int(args["degree"])
    lvl = tcr.trr_phi_tower(k, int(args["level"]), (d, d))
    q = tcr._plain(k).order()
    r_rank = _log_order(q, image(lvl.restriction[d])[0].order())
    f_rank = _log_order(q, image(lvl.frobenius[d])[0].order())
    return {"invariants": list(lvl.groups[d].invariants),
            "r_rank": r_rank, "f_rank": f_rank}


@_op("tower-r-diagonal")
def _tower_r_diagonal(args, token):
    k = ringkit.parse_ring(args["ring"])
    d = int(args["degree"])
    if d % 2:
        raise ParseError("the diagonal summand needs an even degree")
    ring, sqrt = tcr._require_perfect_field(k)
    sp = tcr._ClosedModel(ring, sqrt).space(d)
    inj = sp.inj[(d // 2, d // 2)]
    r = tcr.trr_phi_tower(k, int(args["level"]), (d, d)).restriction[d]
    matches = all(r(inj(x)) == inj(sqrt(x)) for x in ring.elements())
    return {"matches_inverse_frobenius": matches, "checked": ring.order()}


@_op("oracle-base-kernel")
def _oracle_base_kernel(args, token):
    k = ringkit.parse_ring(args["ring"])
    d = int(args["degree"])
    orc = tcr.trr_phi_oracle(k, 1, (0, d), token)
    ring, sqrt = tcr._require_perfect_field(k)
    sp = tcr._ClosedModel(ring, sqrt).space(d)
    amb_total, (i1, i2), _ = orc.ambient[d]
    blocks = []
    for (n, m) in sp.labels:
        if m > n:
            blocks.append(i1.compose(sp.inj[(n, m)]))
            blocks.append(i2.compose(sp.inj[(n, m)]))
        elif n == m:
            blocks.append(i1.compose(sp.inj[(n, m)]) +
                          i2.compose(sp.inj[(n, m)]))
    total, _, projs = direct_sum([b.source for b in blocks])
    h = GroupHom.zero(total, amb_total)
    for block, proj in zip(blocks, projs):
        h = h + block.compose(proj)
    _, pattern_incl = image(h)
    return {"matches_pattern": tcr._subgroup_equal(pattern_incl, orc.incl[d]),
            "order": orc.groups[d].order()}


@_op("limit")
def _limit(args, token):
    k = ringkit.parse_ring(args["ring"])
    return _graded_payload(tcr.trr_phi_limit(k, tuple(args["window"])))


@_op("limit-frobenius")
def _limit_frobenius(args, token):
    k = ringkit.parse_ring(args["ring"])
    ring = tcr._plain(k)
    gg = tcr.trr_phi_limit(k, (0, 2))
    fr = ringkit.frobenius(ring, 2).hom
    return {"matches_squaring": gg.maps[0] == fr, "checked": ring.order()}


@_op("tcr-phi-field")
def _tcr_phi_field(args, token):
    k = ringkit.parse_ring(args["ring"])
    return _graded_payload(tcr.tcr_phi_char2_field(k, tuple(args["window"])))


@_op("tcr-phi-perfect")
def _tcr_phi_perfect(args, token):
    a = ringkit.parse_ring(args["ring"])
    return _graded_payload(tcr.tcr_phi_perfect_algebra(a,
                                                       tuple(args["window"])))


@_op("tcr-phi-torsionfree")
def _tcr_phi_torsionfree(args, token):
    tower = ringkit.parse_ring(args["ring"])
    gg = tcr.tcr_phi_torsionfree(tower, tuple(args["window"]), token=token)
    return _graded_payload(gg)


@_op("tcr-phi-odd")
def _tcr_phi_odd(args, token):
    res = tcr.tcr_phi_odd(_inv_ring(args["ring"]), int(args["prime"]), token)
    return {"vanishes": res.vanishes, "pi0": list(res.pi0.invariants)}


@_op("tcr-odd-field")
def _tcr_odd_field(args, token):
    gg = tcr.tcr_odd_perfect_field(ringkit.parse_ring(args["ring"]),
                                   int(args["prime"]), int(args["depth"]))
    return _graded_payload(gg)


@_op("ml")
def _ml(args, token):
    rep = tcr.ml_check(_inv_ring(args["ring"]), int(args["depth"]), token)
    return {"all_iso": rep.all_iso,
            "per_level": {str(n): v for n, v in rep.per_level.items()},
            "quotients": {str(n): list(v) for n, v in rep.quotients.items()}}


@_op("z-oracle")
def _z_oracle(args, token):
    return _graded_payload(tcr.tcr_phi_Z_oracle(tuple(args["window"])))


@_op("bar-components")
def _bar_components(args, token):
    g = barcalc.parse_group(args["group"])
    dec = barcalc.components(g, token=token)
    if dec.method == "orbits":
        return {"method": dec.method, "count": len(dec.reps),
                "aut_invariants": [list(a) for a in dec.aut_invariants]}
    return {"method": dec.method,
            "index_invariants": list(dec.index_group.invariants),
            "aut_invariants": list(dec.aut_group.invariants)}


@_op("bar-psi")
def _bar_psi(args, token):
    g = barcalc.parse_group(args["group"])
    check = args["check"]
    method = "orbits" if check == "targets-diagonal" else "closed-form"
    dec = barcalc.components(g, method=method, token=token)
    psi = barcalc.psi_on_components(dec)
    if check == "targets-diagonal":
        ok = all(psi.table[i] == dec.component_of[(x, x)]
                 for i, (x, y) in enumerate(dec.reps))
        return {"ok": ok, "checked": len(dec.reps)}
    grp = g.group
    if check == "formula":
        ok = True
        checked = 0
        for s in _sample_elements(grp):
            for bits in _parity_vectors(len(dec.mod2_positions)):
                raw_in = list(s) + list(bits)
                raw_out = ([2 * c for c in s] +
                           [s[p] + b
                            for p, b in zip(dec.mod2_positions, bits)])
                left = psi.hom(dec.index_group.normalize(
                    dec.to_nf.apply(raw_in)))
                right = dec.index_group.normalize(dec.to_nf.apply(raw_out))
                if left != right:
                    ok = False
                checked += 1
        return {"ok": ok, "checked": checked}
    if check == "fixes-zero-section":
        ok = True
        checked = 0
        for bits in _parity_vectors(len(dec.mod2_positions)):
            label = dec.index_group.normalize(
                dec.to_nf.apply([0] * grp.ngens + bits))
            if psi.hom(label) != label:
                ok = False
            checked += 1
        return {"ok": ok, "checked": checked}
    raise ParseError(f"unknown check {check!r}")


def _parity_vectors(k):
    out = [[]]
    for _ in range(k):
        out = [v + [b] for v in out for b in (0, 1)]
    return out


@_op("bar-tau")
def _bar_tau(args, token):
    g = barcalc.parse_group(args["group"])
    dec = barcalc.components(g, token=token)
    tau = barcalc.tau_on_components(dec)
    if dec.method == "orbits":
        return {"fixed_count": len(tau.fixed_indices),
                "swapped_pairs": len(tau.swapped_pairs)}
    grp = g.group
    ok = True
    checked = 0
    for x, y in _sample_pairs(grp):
        got = tau.hom(dec.closed_form_label(x, y))
        if got != dec.closed_form_label(y, x):
            ok = False
        checked += 1
    return {"formula_matches": ok, "checked": checked,
            "fixed_subgroup_invariants": list(tau.fixed_subgroup.invariants)}


def _sample_elements(grp):
    singles = []
    for j in range(grp.ngens):
        for c in range(-2, 3):
            coords = [0] * grp.ngens
            coords[j] = c
            singles.append(grp.normalize(tuple(coords)))
    return sorted(set(singles))


def _sample_pairs(grp):
    singles = _sample_elements(grp)
    return [(x, y) for x in singles for y in singles]


@_op("bar-census")
def _bar_census(args, token):
    rep = barcalc.abelian_report(args["factors"], token=token)
    return {"type_one": rep.type_one_count,
            "type_two": rep.type_two_count,
            "type_two_per_coset": rep.type_two_per_coset,
            "fixed_subgroup_invariants": list(rep.fixed_group.invariants)}


@_op("cli-json")
def _cli_json(args, token):
    from click.testing import CliRunner
    from . import cli
    result = CliRunner().invoke(cli.main, list(args["argv"]))
    payload = {"exit_code": result.exit_code}
    if result.exit_code == 0:
        payload["stdout_json"] = json.loads(result.output)
    return payload


# ---------------------------------------------------------------------------
# the runner


@dataclass
class FixtureResult:
    """Outcome of one fixture: pass/fail, the payloads, and the wall time."""

    fixture_id: str
    op: str
    ok: bool
    expected: dict
    got: object
    seconds: float
    error: str = None


def _jsonify(value):
    if isinstance(value, dict):
        return {str(k): _jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    return value


def _matches(expected, got):
    if isinstance(expected, dict):
        return isinstance(got, dict) and all(
            k in got and _matches(v, got[k]) for k, v in expected.items())
    if isinstance(expected, list):
        return (isinstance(got, list) and len(expected) == len(got) and
                all(_matches(e, g) for e, g in zip(expected, got)))
    return expected == got


def load_fixtures(path=None):
    """Read and validate the fixture file; entries come back in file order."""
    path = Path(path) if path is not None else _FIXTURE_PATH
    try:
        entries = json.loads(path.read_text())
    except (OSError, ValueError) as exc:
        raise ParseError(f"cannot read fixture file {path}: {exc}")
    if not isinstance(entries, list):
        raise ParseError("the fixture file must hold a list of entries")
    seen = set()
    for entry in entries:
        if not isinstance(entry, dict):
            raise ParseError("every fixture entry must be an object")
        for key in ("id", "op", "args", "expect"):
            if key not in entry:
                raise ParseError(f"fixture entry is missing {key!r}")
        if entry["op"] not in _REGISTRY:
            raise ParseError(f"unknown fixture operation {entry['op']!r}")
        if entry["id"] in seen:
            raise ParseError(f"duplicate fixture id {entry['id']!r}")
        seen.add(entry["id"])
    return entries


def run_fixtures(filter_id=None, token=None, path=None):
    """Run all fixtures (or the ones whose id contains ``filter_id``).

    Failures never abort the run: a raised error is recorded on the
    result and execution moves on to the next fixture.
    """
    results = []
    for entry in load_fixtures(path):
        if filter_id is not None and filter_id not in entry["id"]:
            continue
        poll(token)
        start = time.perf_counter()
        got = None
        error = None
        try:
            got = _jsonify(_REGISTRY[entry["op"]](entry["args"], token))
            ok = _matches(entry["expect"], got)
        except Exception as exc:
            ok = False
            error = f"{type(exc).__name__}: {exc}"
        results.append(FixtureResult(
            fixture_id=entry["id"], op=entry["op"], ok=ok,
            expected=entry["expect"], got=got,
            seconds=time.perf_counter() - start, error=error))
    return results
