"""The command line interface, one command at a time."""

import json

import pytest
from click.testing import CliRunner

from tcrcalc.cli import main


def run(*argv):
    return CliRunner().invoke(main, list(argv))


def payload(*argv):
    result = run(*argv)
    assert result.exit_code == 0, result.output
    return json.loads(result.output)


def test_witt_command():
    assert payload("witt", "--ring", "GF(2,x)", "--level", "3") == {
        "input": "GF(2,x)",
        "invariants": [8],
        "level": 3,
        "order": 8,
        "prime": 2,
        "theorem": "witt-truncated-ring",
    }
    out = payload("witt", "--ring", "Z/6", "--level", "2")
    assert out["invariants"] == [3, 12]
    assert out["order"] == 36


def test_witt_text_format():
    result = run("witt", "--ring", "GF(2,x)", "--level", "3", "--format", "text")
    assert result.exit_code == 0
    assert "invariants: [8]" in result.output


def test_bredon_command():
    out = payload("bredon", "--ring", "Z", "--level", "2")
    assert out["theorem"] == "bredon-rep-sphere"
    assert out["window"] == [2, 4]
    assert out["groups"] == {"2": [2], "3": [], "4": [0]}

    out = payload("bredon", "--ring", "two-torsion-pair", "--level", "2")
    assert out["groups"] == {"2": [2], "3": [], "4": [2, 0]}

    out = payload("bredon", "--ring", "norm-cofiber", "--level", "2")
    assert out["theorem"] == "norm-cofiber"
    assert out["groups"] == {"2": [2], "3": [2], "4": [4], "5": [2]}


def test_bredon_rejects_odd_weights():
    result = run("bredon", "--ring", "Z", "--level", "3")
    assert result.exit_code == 2
    assert "error:" in result.output


def test_trr_tower_level():
    out = payload("trr", "--ring", "GF(2,x)", "--level", "2", "--window", "0:3")
    assert out["theorem"] == "trr-phi-tower"
    assert out["groups"] == {
        "0": [2],
        "1": [2, 2],
        "2": [2, 2, 2],
        "3": [2, 2, 2, 2],
    }
    assert out["oracle_checked"] is False


def test_trr_limit():
    out = payload("trr", "--ring", "GF(2,x)", "--window", "0:4")
    assert out["theorem"] == "trr-phi-limit"
    assert out["groups"] == {"0": [2], "1": [], "2": [2], "3": [], "4": [2]}
    assert out["periodicity"] == {"from": 0, "period": 2, "residues": {"0": [2], "1": []}}


def test_trr_oracle_crosscheck():
    out = payload(
        "trr", "--ring", "GF(2,x)", "--level", "2", "--depth", "2", "--window", "0:2"
    )
    assert out["oracle_checked"] is True
    assert out["oracle_counts"]["levels"] == 2
    assert out["oracle_counts"]["checks"] > 0


def test_trr_depth_needs_a_level():
    result = run("trr", "--ring", "GF(2,x)", "--depth", "2", "--window", "0:2")
    assert result.exit_code == 2
    assert "error:" in result.output


def test_tcr_phi_odd_prime():
    out = payload("tcr", "phi", "--ring", "Z/9", "--prime", "3")
    assert out["theorem"] == "tcr-phi-odd-transfer"
    assert out["vanishes"] is True
    assert out["groups"] == {"0": []}
    assert out["window"] == [0, 0]


def test_tcr_phi_char2_field():
    out = payload("tcr", "phi", "--ring", "GF(2,x)", "--prime", "2", "--window", "-2:4")
    assert out["theorem"] == "tcr-phi-char2-field"
    assert out["groups"]["-2"] == []
    for d in range(-1, 5):
        assert out["groups"][str(d)] == [2]


def test_tcr_phi_of_the_two_adic_tower():
    out = payload("tcr", "phi", "--ring", "Z", "--prime", "2", "--window", "-2:9")
    expected = {}
    for d in range(-2, 10):
        if d <= -2:
            expected[str(d)] = []
        elif d % 4 == 0:
            expected[str(d)] = [8]
        elif d % 4 in (1, 3):
            expected[str(d)] = [2]
        else:
            expected[str(d)] = []
    assert out["groups"] == expected


def test_tcr_odd_field():
    out = payload("tcr", "odd-field", "--ring", "Z/3", "--prime", "3", "--depth", "2")
    assert out["theorem"] == "tcr-odd-perfect-field"
    assert out["depth"] == 2
    assert out["groups"] == {"-1": [9], "0": [9]}


def test_green_command():
    out = payload("green", "--ring", "GF(2,x)", "--level", "3")
    assert out == {
        "fixed": [16],
        "input": "GF(2,x)",
        "level": 3,
        "reciprocity_pairs": 256,
        "theorem": "pi0-green-witt",
        "underlying": [16],
    }


def test_green_refusal_carries_a_witness():
    result = run("green", "--ring", "Z/4[C2]", "--level", "1")
    assert result.exit_code == 3
    assert "witness" in result.output
    assert "[1, 0, 0, 2]" in result.output.replace('"', "")


def test_mu_command():
    out = payload("mu", "--ring", "Z/4[C2]")
    assert out["mu_iso"] is False
    assert out["witness"] == {"element": [1, 0, 0, 2], "kernel": [2, 2], "order": 2}
    out = payload("mu", "--ring", "GF(2,x)")
    assert out["mu_iso"] is True


def test_bar_command_orbit_route():
    out = payload("bar", "--group", "C2 with inversion")
    assert out["method"] == "orbits"
    assert out["psi"] == [0, 0, 3, 3]
    assert out["tau"] == [0, 2, 1, 3]
    assert out["tau_fixed"] == [0, 3]
    assert out["tau_swapped_pairs"] == [[1, 2]]
    assert out["census"] == {
        "fixed_group": [2],
        "type_one_count": 2,
        "type_two_count": 1,
        "type_two_per_coset": 1,
    }


def test_bar_command_closed_form_route():
    out = payload("bar", "--group", "Z")
    assert out["method"] == "closed-form"
    assert out["index_group"] == [2, 0]
    assert out["psi"] == "(s,z) -> (2s,[s]+z)"
    assert out["tau_fixed_subgroup"] == [2, 0]
    assert out["census"]["type_two_count"] is None


def test_malformed_ring_specs_exit_with_a_parse_error():
    result = run("witt", "--ring", "banana", "--level", "2")
    assert result.exit_code == 2
    assert "error:" in result.output


def test_fixtures_command():
    result = run("fixtures", "--fixture", "norm-tensor")
    assert result.exit_code == 0
    assert "PASS norm-tensor-f2" in result.output
    assert "2/2 fixtures passed" in result.output

    result = run("fixtures", "--fixture", "norm-tensor", "--format", "json")
    records = json.loads(result.output)
    assert [r["id"] for r in records] == ["norm-tensor-f2", "norm-tensor-z8"]
    assert all(r["ok"] for r in records)

    result = run("fixtures", "--fixture", "no-such-id")
    assert result.exit_code == 0
    assert "0/0 fixtures passed" in result.output
