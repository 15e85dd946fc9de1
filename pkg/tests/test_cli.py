import csv
import io
import json
from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from xops import cli
from xops.families import generate, get, registry
from xops.verify import OrthogonalityReport, QuadratureConfig, orthogonality_report


def run(*argv):
    buf = io.StringIO()
    code = cli.main(list(argv), out=buf)
    return code, buf.getvalue()


def test_families_table():
    code, text = run("families")
    assert code == 0
    rows = text.strip().splitlines()[1:]
    assert len(rows) == 17
    assert sum(" x2 " in r for r in rows) == 12
    assert "§" not in text


def test_families_csv_and_json():
    code, text = run("families", "--format", "csv")
    assert code == 0 and text.endswith("\r\n")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert [r["id"] for r in rows] == [s.id for s in registry()]
    code, text = run("families", "--format", "json")
    recs = json.loads(text)
    assert [cli.parse_record(r).id for r in recs] == [s.id for s in registry()]


def test_gen_hermite_x2():
    code, text = run("gen", "--family", "hermite-x2", "--n-max", "5")
    assert code == 0
    rec = json.loads(text)
    assert [it["n"] for it in rec["items"]] == [0, 3, 4, 5]
    assert rec["items"][1]["poly"] == ["0/1", "12/1", "0/1", "8/1"]
    sys_ = cli.parse_record(rec)
    assert sys_.items == generate(get("hermite-x2"), {}, 5).items


def test_gen_empty_range():
    code, text = run("gen", "--family", "jacobi-x2-e11-23", "--alpha", "7/3", "--beta", "1/2", "--n-max", "1")
    assert code == 0 and json.loads(text)["items"] == []


@pytest.mark.parametrize("argv,message", [
    (("gen", "--family", "laguerre-x2-I", "--alpha", "0"), "alpha > 0"),
    (("gen", "--family", "laguerre-x2-I", "--alpha", "0.5"), "exact"),
    (("gen", "--family", "nope"), "unknown family"),
    (("verify", "--family", "jacobi-x2-e11-13", "--alpha", "2", "--beta", "0"), "beta"),
    (("gen", "--family", "laguerre", "--param", "alpha=1/0"), ""),
])
def test_usage_errors(argv, message, capsys):
    code, _ = run(*argv)
    assert code == 2
    assert message in capsys.readouterr().err


def test_nonexistence_exit_code():
    code, text = run("verify", "--nonexistence")
    assert code == 1
    lines = text.strip().splitlines()
    assert len(lines) == 19
    assert sum(line.startswith("FAIL") for line in lines) == 2


def test_verify_single_family():
    code, text = run("verify", "--family", "laguerre-x2-I", "--alpha", "2", "--n-max", "6", "--digits", "30")
    assert code == 0
    assert text.count("PASS") >= 9 and "FAIL" not in text


def test_weight_examples():
    code, text = run("weight", "--family", "laguerre-x2-e2a13", "--points", "0,1")
    assert code == 0
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["x", "W", "flag"]
    assert rows[1] == ["0/1", "0", "endpoint"]
    with mpmath.workdps(50):
        assert abs(mpmath.mpf(rows[2][1]) - mpmath.exp(-1) / 7 ** 4) < mpmath.mpf(10) ** -45
    code, text = run("weight", "--family", "laguerre-x2-e2a13", "--grid", "1:2:0")
    assert code == 0 and text == "x,W,flag\r\n"


def test_plotdata_columns():
    code, text = run("plotdata", "--family", "hermite-x2", "--grid", "-1:1:5", "--n-max", "4")
    assert code == 0
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["x", "W", "flag", "y_0", "y_3", "y_4"]
    assert len(rows) == 6


def test_chain_output():
    code, text = run("chain", "--family", "hermite-x2")
    assert code == 0
    assert "state-adding" in text and "lambda0 = 6/1" in text
    code, text = run("chain", "--family", "laguerre-x2-e11-13", "--alpha", "1/2", "--format", "json")
    assert code == 0
    assert [s["kind"] for s in json.loads(text)["steps"]] == ["isospectral", "state-adding"]


def test_determinism():
    argv = ("gen", "--family", "jacobi-x2-e2a13", "--a", "1/2", "--n-max", "6")
    assert run(*argv)[1] == run(*argv)[1]
    argv = ("weight", "--family", "hermite-x2", "--grid", "-2:2:9")
    assert run(*argv)[1] == run(*argv)[1]


def test_digits_env(monkeypatch, capsys):
    monkeypatch.setenv(cli.DIGITS_ENV, "30")
    code, text = run("weight", "--family", "hermite-x2", "--points", "1")
    assert code == 0
    digits = len(text.splitlines()[1].split(",")[1].replace(".", "").lstrip("0"))
    assert 28 <= digits <= 32
    monkeypatch.setenv(cli.DIGITS_ENV, "7")
    assert run("weight", "--family", "hermite-x2", "--points", "1")[0] == 2
    assert cli.DIGITS_ENV in capsys.readouterr().err


def test_samples_file_matches_registry():
    samples = cli.load_samples()
    assert set(samples) == {s.id for s in registry()}
    for s in registry():
        assert samples[s.id] == [dict(p) for p in s.samples]


@pytest.mark.parametrize("text,value", [("3", F(3)), ("-7/2", F(-7, 2)), ("+4/6", F(2, 3))])
def test_parse_exact(text, value):
    assert cli.parse_exact(text) == value
    assert cli.parse_exact(cli.scalar_str(value)) == value


# ---------------------------------------------------------- round trips

FAMILIES = [s for s in registry()]


@st.composite
def systems(draw):
    spec = draw(st.sampled_from(FAMILIES))
    params = draw(st.sampled_from(spec.samples))
    n = draw(st.integers(0, 7))
    return generate(spec, params, n, check=False)


@settings(max_examples=100)
@given(systems())
def test_system_round_trip(system):
    rec = cli.serialize(system)
    back = cli.parse_record(json.loads(cli.dumps(rec)))
    assert back.items == system.items
    assert back.operator == system.operator
    assert back.weight == system.weight
    assert back.params == system.params and back.interval == system.interval
    assert cli.dumps(cli.serialize(back)) == cli.dumps(rec)


def _mpf(draw, bits):
    man = draw(st.integers(-(2 ** bits) + 1, 2 ** bits - 1))
    return mpmath.mpf((man, draw(st.integers(-400, 40))))


@st.composite
def reports(draw):
    spec = draw(st.sampled_from(FAMILIES))
    params = draw(st.sampled_from(spec.samples))
    bits = draw(st.sampled_from([53, 120, 200, 340]))
    k = draw(st.integers(1, 4))
    with mpmath.workprec(bits):
        gram = [[_mpf(draw, bits) for _ in range(k)] for _ in range(k)]
        return OrthogonalityReport(spec.id, params, list(range(k)), gram, _mpf(draw, bits),
                                   [_mpf(draw, bits) for _ in range(k)], [_mpf(draw, bits) for _ in range(3)])


def _check_report_round_trip(rep):
    rec = cli.serialize(rep)
    back = cli.parse_record(json.loads(cli.dumps(rec)))
    assert back.gram == rep.gram and back.norms == rep.norms
    assert back.max_off_diagonal == rep.max_off_diagonal and back.moments == rep.moments
    assert back.params == rep.params and back.degrees == rep.degrees
    assert cli.dumps(cli.serialize(back)) == cli.dumps(rec)


@settings(max_examples=100)
@given(reports())
def test_report_round_trip(rep):
    _check_report_round_trip(rep)


def test_real_report_round_trip():
    system = generate(get("laguerre-x2-e2a13"), {}, 5)
    _check_report_round_trip(orthogonality_report(system, QuadratureConfig(decimal_digits=40)))


def test_family_round_trip():
    for spec in registry():
        assert cli.parse_record(json.loads(cli.dumps(cli.serialize(spec)))) is spec


def test_parse_rejects_other_schema():
    rec = cli.serialize(get("hermite"))
    rec["schema"] = "xops/0"
    with pytest.raises(ValueError):
        cli.parse_record(rec)
