"""CLI contract: exit codes, JSON schema, determinism, polarity metadata."""

import json

from lcklab import cli


def test_parse_fixture_strings():
    name, params = cli.parse_fixture("hopf_diag:n=2,beta=0.5")
    assert name == "hopf_diag" and params == {"n": 2, "beta": 0.5}
    name, params = cli.parse_fixture("hopf_nondiag:beta=0.4+0.1j,m=2")
    assert params["beta"] == 0.4 + 0.1j and params["m"] == 2
    name, params = cli.parse_fixture("inoue_splus")
    assert name == "inoue_splus" and params == {}


def test_verify_exit_codes(tmp_path):
    rc = cli.main(["verify", "hopf_diag:n=2,beta=0.5", "--points", "40",
                   "--json", str(tmp_path / "out.json")])
    assert rc == 0
    body = json.loads((tmp_path / "out.json").read_text())
    assert body["fixture"] == "hopf_diag:n=2,beta=0.5"
    assert body["seed"] == 42 and body["points"] == 40
    for check in body["checks"]:
        assert set(check) == {"name", "residual", "tolerance", "polarity",
                              "pass", "paper_anchor"}
        small = check["residual"] < check["tolerance"]
        expected = small if check["polarity"] == "expect_small" else not small
        assert check["pass"] == expected
    assert body["verdicts"][0]["verdict"] == "VaismanExists"
    assert "runtime_ms" in body


def test_unknown_fixture_exits_2(capsys):
    assert cli.main(["verify", "unknown_thing"]) == 2


def test_inadmissible_profile_exits_4(capsys):
    assert cli.main(["potential", "first-order", "--f", "const:-2"]) == 4


def test_numerical_failure_exits_3(monkeypatch, capsys):
    from lcklab.errors import NumericalError

    def boom(*args, **kwargs):
        raise NumericalError("singular solve", point=[0.0, 0.0])

    monkeypatch.setattr(cli, "run_verify", boom)
    assert cli.main(["verify", "hopf_diag"]) == 3
    assert "singular solve" in capsys.readouterr().err


def test_expected_fail_checks_are_labeled(tmp_path):
    rc = cli.main(["verify", "inoue_splus", "--points", "40",
                   "--json", str(tmp_path / "r.json")])
    assert rc == 0
    body = json.loads((tmp_path / "r.json").read_text())
    by_name = {c["name"]: c for c in body["checks"]}
    vais = by_name["vaisman_parallel_lee"]
    assert vais["polarity"] == "expect_large"
    assert vais["pass"] and vais["residual"] > vais["tolerance"]


def test_potential_first_order_const(tmp_path):
    rc = cli.main(["potential", "first-order", "--f", "const:0",
                   "--json", str(tmp_path / "p.json")])
    assert rc == 0
    body = json.loads((tmp_path / "p.json").read_text())
    assert abs(body["solution"]["c"] - 1.0) < 1e-12
    assert abs(body["solution"]["min_g"] - 1.0) < 1e-12


def test_potential_orbit(tmp_path):
    rc = cli.main(["potential", "orbit", "--fixture", "leeolo:eps=0.3",
                   "--json", str(tmp_path / "o.json")])
    assert rc == 0
    body = json.loads((tmp_path / "o.json").read_text())
    by_name = {c["name"]: c for c in body["checks"]}
    assert by_name["flow_expansion"]["residual"] < 1e-6


def test_report_all_schema_and_determinism(tmp_path):
    rep1, code1 = cli.run_report(points=40, seed=42, nodes=256)
    rep2, code2 = cli.run_report(points=40, seed=42, nodes=256)
    assert code1 == code2 == 0
    assert rep1["total"] == len(cli.DEFAULT_FIXTURES)
    assert set(rep1["summary"]) == set(cli.DEFAULT_FIXTURES)
    s1 = json.dumps(cli.strip_volatile(rep1), indent=2)
    s2 = json.dumps(cli.strip_volatile(rep2), indent=2)
    assert s1 == s2
    assert "runtime_ms" not in s1
