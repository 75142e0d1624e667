"""Command line front end.

Every subcommand parses its inputs, dispatches to the library, and emits
either JSON (sorted keys, byte-identical across runs) or a plain text
table.  Exit codes: 2 for malformed input, 3 when a computation refuses
to run (a failed hypothesis, a tower that does not stabilize, an
enumeration over budget), 1 for internal errors, 130 when interrupted.
"""

import json
import signal
import sys

import click

from ._errors import CancelToken, OperationCancelled, ParseError, Refusal
from .abelian import Z as _Z
from . import barcalc as _barcalc
from . import fixtures as _fixtures
from . import mackey as _mackey
from . import ringkit as _ringkit
from . import tcr as _tcr
from . import witt as _witt

_FMT = click.option("--format", "fmt", default="json",
                    type=click.Choice(["text", "json"]),
                    show_default=True, help="output format")


def _parse_window(text):
    parts = text.split(":")
    if len(parts) != 2:
        raise ParseError(f"window must look like lo:hi, got {text!r}")
    try:
        lo, hi = int(parts[0]), int(parts[1])
    except ValueError:
        raise ParseError(f"window bounds must be integers, got {text!r}")
    if lo > hi:
        raise ParseError(f"window lower bound {lo} exceeds upper bound {hi}")
    if hi - lo + 1 > 64:
        raise ParseError("window spans more than 64 degrees")
    return lo, hi


def _check_depth(depth):
    if not 1 <= depth <= 12:
        raise ParseError(f"depth must be between 1 and 12, got {depth}")
    return depth


def _check_prime(p):
    if p < 2 or any(p % d == 0 for d in range(2, int(p ** 0.5) + 1)):
        raise ParseError(f"{p} is not a prime")
    return p


def _group_text(invariants):
    if not invariants:
        return "0"
    return " + ".join("Z" if d == 0 else f"Z/{d}" for d in invariants)


def _graded_payload(gg):
    lo, hi = gg.window
    return {
        "window": [lo, hi],
        "groups": {str(d): list(gg.group(d).invariants)
                   for d in range(lo, hi + 1)},
        "periodicity": gg.periodicity,
    }


def _render_text(payload):
    for key in sorted(payload):
        if key == "groups":
            continue
        value = payload[key]
        if isinstance(value, (dict, list)):
            value = json.dumps(value, sort_keys=True)
        click.echo(f"{key}: {value}")
    groups = payload.get("groups")
    if groups is not None:
        for d in sorted(groups, key=int):
            click.echo(f"pi_{d} = {_group_text(groups[d])}")


def _emit(payload, fmt):
    if fmt == "json":
        click.echo(json.dumps(payload, sort_keys=True, indent=2))
    else:
        _render_text(payload)


def _dispatch(fn, fmt):
    """Run a command body with SIGINT wired to the cancellation token."""
    token = CancelToken()
    previous = None
    try:
        previous = signal.signal(signal.SIGINT,
                                 lambda signum, frame: token.cancel())
    except ValueError:
        pass
    try:
        payload = fn(token)
    except ParseError as exc:
        _die(2, exc)
    except Refusal as exc:
        _die(3, exc)
    except OperationCancelled as exc:
        _die(130, exc)
    except Exception as exc:
        _die(1, f"{type(exc).__name__}: {exc}")
    finally:
        if previous is not None:
            signal.signal(signal.SIGINT, previous)
    _emit(payload, fmt)


def _die(code, message):
    extra = getattr(message, "witness", None)
    click.echo(f"error: {message}", err=True)
    if extra:
        click.echo(json.dumps({"witness": extra}, sort_keys=True), err=True)
    sys.exit(code)


@click.group()
def main():
    """Exact Witt-vector, Bredon-homology, and fixed-row computations."""


# ---------------------------------------------------------------------------
# witt


@main.command("witt")
@click.option("--ring", required=True, help="base ring spec")
@click.option("--prime", default=2, show_default=True, type=int)
@click.option("--level", required=True, type=int,
              help="truncation length n of W_n")
@_FMT
def witt_cmd(ring, prime, level, fmt):
    """Additive structure of a truncated Witt-vector ring."""
    def body(token):
        _check_prime(prime)
        if level < 1:
            raise ParseError("level must be at least 1")
        base = _tcr._plain(_ringkit.parse_ring(ring))
        wr = _witt.witt_finring(base, prime, level)
        return {
            "input": ring,
            "theorem": "witt-truncated-ring",
            "prime": prime,
            "level": level,
            "invariants": list(wr.group.invariants),
            "order": wr.order(),
        }
    _dispatch(body, fmt)


# ---------------------------------------------------------------------------
# bredon


@main.command("bredon")
@click.option("--ring", "coefficients", required=True,
              help='coefficients: a ring spec, "Z", "two-torsion-pair",'
                   ' or "norm-cofiber"')
@click.option("--level", "weight", required=True, type=int,
              help="even weight of the representation sphere")
@_FMT
def bredon_cmd(coefficients, weight, fmt):
    """Equivariant homotopy of a representation sphere smashed with a
    Mackey functor, or of the norm cofiber."""
    def body(token):
        if weight < 0 or weight % 2:
            raise ParseError("the weight must be a nonnegative even integer")
        if coefficients == "norm-cofiber":
            gg = _mackey.norm_cofiber_homotopy(weight)
            theorem = "norm-cofiber"
        else:
            if coefficients == "Z":
                m = _mackey.constant_mackey(_Z)
            elif coefficients == "two-torsion-pair":
                m = _mackey.two_torsion_pair_mackey()
            else:
                base = _tcr._plain(_ringkit.parse_ring(coefficients))
                m = _mackey.constant_mackey(base.group)
            gg = _mackey.rep_sphere_homotopy(m, weight)
            theorem = "bredon-rep-sphere"
        payload = _graded_payload(gg)
        payload.update({"input": coefficients, "theorem": theorem,
                        "oracle_checked": False})
        return payload
    _dispatch(body, fmt)


# ---------------------------------------------------------------------------
# tcr


@main.group("tcr")
def tcr_group():
    """Graded fixed-row invariants at a prime."""


@tcr_group.command("phi")
@click.option("--ring", required=True, help="ring or tower spec")
@click.option("--prime", default=2, show_default=True, type=int)
@click.option("--window", "window_text", default="-2:8", show_default=True)
@click.option("--depth", default=8, show_default=True, type=int,
              help="stabilization depth for tower inputs")
@_FMT
def tcr_phi_cmd(ring, prime, window_text, depth, fmt):
    """Graded invariants of the geometric fixed rows at a prime."""
    def body(token):
        _check_prime(prime)
        _check_depth(depth)
        window = _parse_window(window_text)
        ring_obj = _ringkit.parse_ring(ring)
        if prime != 2:
            if not isinstance(ring_obj, _ringkit.InvRing):
                raise Refusal("odd-prime invariants need a finite ring with"
                              " involution")
            res = _tcr.tcr_phi_odd(ring_obj, prime, token)
            return {
                "input": ring,
                "theorem": "tcr-phi-odd-transfer",
                "window": [0, 0],
                "groups": {"0": list(res.pi0.invariants)},
                "periodicity": None,
                "vanishes": res.vanishes,
                "oracle_checked": False,
            }
        if isinstance(ring_obj, _ringkit.ProRing):
            gg = _tcr.tcr_phi_torsionfree(ring_obj, window, depth=depth,
                                          token=token)
            theorem = "tcr-phi-torsionfree"
        else:
            try:
                gg = _tcr.tcr_phi_char2_field(ring_obj, window)
                theorem = "tcr-phi-char2-field"
            except Refusal:
                gg = _tcr.tcr_phi_perfect_algebra(ring_obj, window)
                theorem = "tcr-phi-perfect-algebra"
        payload = _graded_payload(gg)
        payload.update({"input": ring, "theorem": theorem,
                        "oracle_checked": False})
        return payload
    _dispatch(body, fmt)


@tcr_group.command("odd-field")
@click.option("--ring", required=True, help="perfect field of odd"
              " characteristic")
@click.option("--prime", required=True, type=int)
@click.option("--depth", default=2, show_default=True, type=int,
              help="Witt truncation depth N")
@_FMT
def tcr_odd_field_cmd(ring, prime, depth, fmt):
    """Degree 0 and -1 invariants over a perfect field at an odd prime."""
    def body(token):
        _check_prime(prime)
        _check_depth(depth)
        gg = _tcr.tcr_odd_perfect_field(_ringkit.parse_ring(ring), prime,
                                        depth)
        payload = _graded_payload(gg)
        payload.update({"input": ring, "theorem": "tcr-odd-perfect-field",
                        "depth": depth, "oracle_checked": False})
        return payload
    _dispatch(body, fmt)


# ---------------------------------------------------------------------------
# trr


@main.command("trr")
@click.option("--ring", required=True, help="perfect field of"
              " characteristic 2")
@click.option("--level", default=None, type=int,
              help="tower level; omit for the limit")
@click.option("--window", "window_text", default="0:6", show_default=True)
@click.option("--depth", default=None, type=int,
              help="rebuild the tower up to this level by pullback and"
                   " compare against the closed description")
@_FMT
def trr_cmd(ring, level, window_text, depth, fmt):
    """Closed description of one tower level, or of the limit."""
    def body(token):
        window = _parse_window(window_text)
        k = _ringkit.parse_ring(ring)
        oracle_counts = None
        if level is None:
            if depth is not None:
                raise ParseError("the oracle depth applies to a tower"
                                 " level, not the limit")
            gg = _tcr.trr_phi_limit(k, window)
            payload = _graded_payload(gg)
            theorem = "trr-phi-limit"
        else:
            if level < 1:
                raise ParseError("level must be at least 1")
            lvl = _tcr.trr_phi_tower(k, level, window)
            lo, hi = lvl.window
            payload = {
                "window": [lo, hi],
                "groups": {str(d): list(lvl.group(d).invariants)
                           for d in range(lo, hi + 1)},
                "periodicity": None,
            }
            theorem = "trr-phi-tower"
            if depth is not None:
                _check_depth(depth)
                oracle_counts = _tcr.oracle_matches_closed(k, depth, window,
                                                           token)
        payload.update({"input": ring, "theorem": theorem,
                        "oracle_checked": oracle_counts is not None})
        if oracle_counts is not None:
            payload["oracle_counts"] = oracle_counts
        return payload
    _dispatch(body, fmt)


# ---------------------------------------------------------------------------
# mu and green


@main.command("mu")
@click.option("--ring", required=True)
@_FMT
def mu_cmd(ring, fmt):
    """Whether the multiplication map of the norm tensor ring is bijective."""
    def body(token):
        flag, witness = _ringkit.mu_is_iso(_ringkit.parse_ring(ring))
        payload = {"input": ring, "theorem": "norm-multiplication",
                   "mu_iso": flag}
        if witness is not None:
            payload["witness"] = witness
        return payload
    _dispatch(body, fmt)


@main.command("green")
@click.option("--ring", required=True)
@click.option("--level", required=True, type=int)
@_FMT
def green_cmd(ring, level, fmt):
    """Degree-zero ring pair with transfer, in Witt coordinates."""
    def body(token):
        data = _tcr.pi0_trr_green(_ringkit.parse_ring(ring), level, token)
        return {
            "input": ring,
            "theorem": "pi0-green-witt",
            "level": data.level,
            "underlying": list(data.underlying.group.invariants),
            "fixed": list(data.fixed.group.invariants),
            "reciprocity_pairs": data.reciprocity_pairs,
        }
    _dispatch(body, fmt)


# ---------------------------------------------------------------------------
# bar


@main.command("bar")
@click.option("--group", "group_text", required=True,
              help='group spec, e.g. "C2", "Z", "Z/2 + Z/4",'
                   ' optionally "... with inversion"')
@_FMT
def bar_cmd(group_text, fmt):
    """Components of the two-sided bar construction, their automorphism
    groups, the squaring and flip self-maps, and the census."""
    def body(token):
        g = _barcalc.parse_group(group_text)
        dec = _barcalc.components(g, token=token)
        psi = _barcalc.psi_on_components(dec)
        tau = _barcalc.tau_on_components(dec)
        payload = {"input": group_text, "theorem": "bar-components",
                   "method": dec.method}
        if dec.method == "orbits":
            payload.update({
                "labels": list(dec.component_labels()),
                "aut_invariants": [list(a) for a in dec.aut_invariants],
                "psi": list(psi.table),
                "tau": list(tau.table),
                "tau_fixed": list(tau.fixed_indices),
                "tau_swapped_pairs": [list(p) for p in tau.swapped_pairs],
            })
        else:
            payload.update({
                "index_group": list(dec.index_group.invariants),
                "aut_invariants": list(dec.aut_group.invariants),
                "psi": psi.formula,
                "tau": tau.formula,
                "tau_fixed_subgroup": list(tau.fixed_subgroup.invariants),
            })
        try:
            census = _barcalc.abelian_report(g, token=token)
            payload["census"] = {
                "type_one_count": census.type_one_count,
                "type_two_count": census.type_two_count,
                "type_two_per_coset": census.type_two_per_coset,
                "fixed_group": list(census.fixed_group.invariants),
            }
        except Refusal as exc:
            payload["census"] = {"refused": str(exc)}
        return payload
    _dispatch(body, fmt)


# ---------------------------------------------------------------------------
# fixtures


@main.command("fixtures")
@click.option("--fixture", "fixture_filter", default=None,
              help="run only fixtures whose id contains this substring")
@click.option("--format", "fmt", default="text", show_default=True,
              type=click.Choice(["text", "json"]))
def fixtures_cmd(fixture_filter, fmt):
    """Run the frozen example computations and report pass/fail."""
    token = CancelToken()
    previous = None
    try:
        previous = signal.signal(signal.SIGINT,
                                 lambda signum, frame: token.cancel())
    except ValueError:
        pass
    try:
        results = _fixtures.run_fixtures(filter_id=fixture_filter,
                                         token=token)
    except ParseError as exc:
        _die(2, exc)
    except Refusal as exc:
        _die(3, exc)
    except OperationCancelled as exc:
        _die(130, exc)
    except Exception as exc:
        _die(1, f"{type(exc).__name__}: {exc}")
    finally:
        if previous is not None:
            signal.signal(signal.SIGINT, previous)
    failed = [r for r in results if not r.ok]
    if fmt == "json":
        click.echo(json.dumps([{
            "id": r.fixture_id, "op": r.op, "ok": r.ok,
            "expected": r.expected, "got": r.got, "error": r.error,
        } for r in results], sort_keys=True, indent=2))
    else:
        for r in results:
            mark = "PASS" if r.ok else "FAIL"
            click.echo(f"{mark} {r.fixture_id} ({r.seconds:.2f}s)")
            if not r.ok:
                click.echo(f"     expected {json.dumps(r.expected, sort_keys=True)}")
                click.echo(f"     got      {json.dumps(r.got, sort_keys=True)}")
                if r.error:
                    click.echo(f"     error    {r.error}")
        total = len(results)
        click.echo(f"{total - len(failed)}/{total} fixtures passed")
    if failed:
        sys.exit(1)


if __name__ == "__main__":
    main()
