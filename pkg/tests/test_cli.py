import json

import pytest

from biratlab.cli import canonical, main, parse_param


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if code == 0 and out.strip() else None), err


@pytest.mark.parametrize("argv, kind", [
    (["pc", "--map", "K", "--param", "b=-3/5", "--nmax", "6"], "pc"),
    (["covariant-check", "--map", "K2", "--param", "a=3", "--param", "b=5",
      "--m", "(u-1)*(v-1)*(u-v)", "--points", "20"], "covariant-check"),
    (["degrees", "--map", "K", "--generic", "--nmax", "6"], "degrees"),
    (["cycles", "--map", "K", "--param", "b=-3/5", "--order", "3"], "cycles"),
    (["zeta", "--map", "K", "--param", "b=-3/5", "--nmax", "4", "--exact-upto", "2"], "zeta"),
    (["lyapunov", "--map", "K", "--param", "b=-0.6", "--n", "10000"], "lyapunov"),
    (["dimension", "--map", "K", "--param", "b=-0.6", "--n", "100000", "--no-box"], "dimension"),
    (["sweep", "--map", "K", "--vary", "b", "--start", "-0.6", "--stop", "-0.5", "--step", "0.1", "--n", "5000"],
     "sweep"),
])
def test_reports(capsys, argv, kind):
    code, report, _ = run(capsys, *argv)
    assert code == 0
    assert report["kind"] == kind
    assert report["config"]["map"] in ("K", "K2")


def test_covariant_verdict(capsys):
    _, report, _ = run(capsys, "covariant-check", "--map", "K2", "--param", "a=3", "--param", "b=5",
                       "--m", "(u-1)*(v-1)*(u-v)", "--points", "20")
    assert report["result"]["verdict"] == "ExactTwoForm"


def test_reports_are_byte_identical(capsys):
    argv = ["lyapunov", "--map", "K", "--param", "b=-0.6", "--n", "20000"]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first


def test_escape_is_reported_not_raised(capsys):
    code, report, _ = run(capsys, "lyapunov", "--map", "K", "--param", "b=-3/2", "--n", "1000")
    assert code == 0
    assert report["result"]["status"].startswith("EscapedAt")
    assert report["result"]["sigma1"] is None


@pytest.mark.parametrize("argv", [
    ["pc", "--map", "K", "--param", "b=0.6"],           # exact commands want rationals
    ["pc", "--map", "Nope"],
    ["pc", "--map", "K"],                               # missing parameter
    ["covariant-check", "--map", "K2", "--param", "a=3", "--param", "b=5", "--m", "u+"],
    ["covariant-check", "--map", "K2", "--param", "a=3", "--param", "b=5", "--m", "w"],
    ["portrait", "--map", "K", "--param", "b=-0.6"],    # no output file
    ["degrees", "--map", "K", "--param", "b=1/2", "--tie", "zz"],
    ["bogus"],
])
def test_usage_errors_exit_1(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1
    assert "usage" in err or "error" in err


def test_portrait_writes_csv(tmp_path, capsys):
    out = tmp_path / "k.csv"
    code = main(["portrait", "--map", "K", "--param", "b=-0.6", "--n", "100", "--coords", "arctan", "--csv", str(out)])
    assert code == 0
    assert out.read_text().splitlines()[0] == "theta_u,theta_v"


def test_verify_single_criterion(capsys):
    code = main(["verify", "--only", "7"])
    captured = capsys.readouterr()
    assert code == 0
    # progress lines go to stderr so stdout stays pure JSON
    assert "[PASS] #7" in captured.err
    assert json.loads(captured.out)["result"][0]["passed"] is True


def test_param_parsing():
    from fractions import Fraction

    assert parse_param("b=-3/5", exact=True) == ("b", Fraction(-3, 5))
    assert parse_param("c=0.1", exact=False) == ("c", Fraction(1, 10))
    assert canonical({"x": float("nan"), "y": 1 / 3, "z": Fraction(1, 3)}) == {"x": None, "y": 0.333333333333,
                                                                             "z": "1/3"}
