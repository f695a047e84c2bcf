import csv
import io
import json
import math

import pytest

from bandspectra.cli import RunConfig, main, validate
from bandspectra.operator_model import BandOperatorSpec, Constant, Cosine, Filtration, Periodic, Table
from bandspectra.serialize import ConfigError, dumps, spec_from_json, spec_to_json

FREE_DOC = {"diagonal": {"kind": "constant", "value": 0.0}, "filtration": "bilateral"}
QUICK = "250,500,1000,2000"


def write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# -- validate --------------------------------------------------------------------


def test_validate_examples():
    bad_sigma = RunConfig("spectrum", {"potential": [], "sigma": -1.0})
    assert "sigma must be positive" in validate(bad_sigma)
    bad_sched = RunConfig("spectrum", dict(FREE_DOC), schedule=(100, 100, 200))
    assert any("strictly increasing" in v for v in validate(bad_sched))
    assert validate(RunConfig("spectrum", dict(FREE_DOC))) == []


def test_validate_operator_source():
    both = dict(FREE_DOC, potential=[], sigma=0.5)
    assert validate(RunConfig("spectrum", both))
    assert validate(RunConfig("spectrum", {}))


def test_validate_command_options():
    assert validate(RunConfig("classify", dict(FREE_DOC)))
    assert validate(RunConfig("classify", dict(FREE_DOC), options={"lambda": 0.0})) == []
    assert validate(RunConfig("moments", dict(FREE_DOC), options={"moments_up_to": 13}))
    assert validate(RunConfig("diagnose", dict(FREE_DOC), output_format="csv"))
    wide = dict(FREE_DOC, bands={"1": {"kind": "constant", "value": 1.0},
                                 "2": {"kind": "constant", "value": 1.0}})
    assert validate(RunConfig("spectrum", wide))


# -- serialization -----------------------------------------------------------------


@pytest.mark.parametrize(
    "spec",
    [
        BandOperatorSpec(Constant(0.5)),
        BandOperatorSpec(Periodic((1.0, -1.0)), {1: Cosine(0.5, 0.3, 0.1), 3: Constant(2.0)}),
        BandOperatorSpec(Table((1.0, 2.0), start=-3, default=0.5), {}),
    ],
)
def test_spec_json_round_trip(spec):
    doc = json.loads(json.dumps(spec_to_json(spec, Filtration.UNILATERAL)))
    back, filt = spec_from_json(doc)
    assert back == spec and filt is Filtration.UNILATERAL


def test_spec_json_schema_errors():
    with pytest.raises(ConfigError):
        spec_from_json({"diagonal": {"kind": "nope"}})
    with pytest.raises(ConfigError):
        spec_from_json({"diagonal": {"kind": "constant"}})
    with pytest.raises(ConfigError):
        spec_from_json({"diagonal": {"kind": "constant", "value": 0}, "bands": {"0": {}}})


def test_dumps_floats_and_order():
    text = dumps({"b": 0.1, "a": [1, 2.0, float("nan")], "c": None})
    assert text.index('"b"') < text.index('"a"')
    assert "0.10000000000000001" in text and "2.0" in text and "null" in text
    assert json.loads(text)["b"] == 0.1


# -- exit codes -----------------------------------------------------------------------


def test_missing_config_exits_2(capsys, tmp_path):
    code, out, err = run_cli(capsys, "spectrum", "--config", str(tmp_path / "none.json"))
    assert code == 2 and out == ""
    assert json.loads(err)["error"] == "config"


def test_malformed_config_exits_2(capsys, tmp_path):
    code, _, err = run_cli(capsys, "spectrum", "--config", write(tmp_path, "{not json"))
    assert code == 2 and json.loads(err)["error"] == "config"
    bad = write(tmp_path, {"diagonal": {"kind": "mystery"}}, "b.json")
    code, _, err = run_cli(capsys, "spectrum", "--config", bad)
    assert code == 2


def test_usage_error_exits_2(capsys, tmp_path):
    code, _, err = run_cli(capsys, "frobnicate", "--config", write(tmp_path, FREE_DOC))
    assert code == 2 and json.loads(err)["error"] == "usage"


def test_precondition_exits_3(capsys, tmp_path):
    code, out, err = run_cli(
        capsys, "spectrum", "--config", write(tmp_path, FREE_DOC), "--schedule", "100,100,200"
    )
    assert code == 3 and out == ""
    doc = json.loads(err)
    assert doc["error"] == "precondition"
    assert any("strictly increasing" in v for v in doc["violations"])
    cfg = write(tmp_path, {"potential": [], "sigma": -1.0}, "s.json")
    code, _, err = run_cli(capsys, "spectrum", "--config", cfg)
    assert code == 3 and "sigma must be positive" in json.loads(err)["violations"]


# -- commands ------------------------------------------------------------------------------


def test_spectrum_free(capsys, tmp_path):
    code, out, _ = run_cli(
        capsys, "spectrum", "--config", write(tmp_path, FREE_DOC), "--schedule", QUICK, "--jobs", "1"
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == 1
    [[lo, hi]] = doc["essential_support"]
    assert abs(lo + 2) <= 0.1 and abs(hi - 2) <= 0.1


def test_spectrum_discretization_csv(capsys, tmp_path):
    cfg = write(tmp_path, {"potential": [], "sigma": 0.5})
    code, out, _ = run_cli(capsys, "spectrum", "--config", cfg, "--schedule", QUICK, "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["interval_lo", "interval_hi"]
    [(lo, hi)] = [tuple(map(float, r)) for r in rows[1:]]
    assert abs(lo) <= 0.1 and abs(hi - 2) <= 0.1


def test_classify_command(capsys, tmp_path):
    cfg = write(tmp_path, dict(FREE_DOC, filtration="unilateral"))
    code, out, _ = run_cli(capsys, "classify", "--config", cfg, "--lambda", "3.0", "--schedule", QUICK)
    assert code == 0
    assert json.loads(out)["point"]["verdict"] == "outside"


def test_distribution_command_writes_file(capsys, tmp_path):
    cfg = write(tmp_path, dict(FREE_DOC, filtration="unilateral", n=10))
    dest = tmp_path / "dist.csv"
    code, out, _ = run_cli(capsys, "distribution", "--config", cfg, "--out", str(dest))
    assert code == 0 and out == ""
    rows = list(csv.reader(io.StringIO(dest.read_text())))
    assert rows[0] == ["index", "lambda"] and len(rows) == 11
    vals = [float(r[1]) for r in rows[1:]]
    expected = sorted(2 * math.cos(k * math.pi / 11) for k in range(1, 11))
    assert max(abs(a - b) for a, b in zip(vals, expected)) <= 1e-9


def test_moments_command(capsys, tmp_path):
    cfg = write(tmp_path, dict(FREE_DOC, moments_up_to=4, oracle_window=50, interval=[-1.0, 1.0]))
    code, out, _ = run_cli(capsys, "moments", "--config", cfg, "--schedule", QUICK)
    assert code == 0
    doc = json.loads(out)
    oracle = {m["k"]: m["oracle"] for m in doc["moments"]}
    assert oracle[2] == pytest.approx(2.0) and oracle[4] == pytest.approx(6.0)
    assert doc["accumulation"]["pass"] is True


def test_sweep_command(capsys, tmp_path):
    sigmas = [0.3, 0.4, 0.5]
    cfg = write(tmp_path, {"potential": [{"poly": [0.0, 0.0, 1.0]}], "sigmas": sigmas})
    code, out, _ = run_cli(capsys, "sweep", "--config", cfg, "--schedule", QUICK)
    assert code == 0
    rows = [tuple(map(float, r)) for r in list(csv.reader(io.StringIO(out)))[1:]]
    assert rows == sorted(rows)
    assert {r[0] for r in rows} == set(sigmas)
    for sigma, lo, hi in rows:
        # mapped Gershgorin bound: a (2 + sup|d|) + b with sup|d| = 8
        a, b = 1 / (8 * sigma**2), 1 / (4 * sigma**2)
        assert -a * 10 + b - 0.1 <= lo <= hi <= a * 10 + b + 0.1


def test_diagnose_free_unilateral(capsys, tmp_path):
    cfg = write(tmp_path, dict(FREE_DOC, filtration="unilateral"))
    code, out, _ = run_cli(capsys, "diagnose", "--config", cfg)
    assert code == 0
    res = json.loads(out)
    assert res["degree"] == {"diagonal": 0, "bands": {"1": 1}, "total": 1}
    assert res["filtration_norm_bound"] == pytest.approx(2 * (1 + math.sqrt(2)))


def test_diagnose_command(capsys, tmp_path):
    doc = dict(FREE_DOC, bands={"1": {"kind": "constant", "value": 1.0},
                                "2": {"kind": "cosine", "amplitude": 0.5, "frequency": 0.3}})
    code, out, _ = run_cli(capsys, "diagnose", "--config", write(tmp_path, doc))
    assert code == 0
    res = json.loads(out)
    assert res["degree"]["diagonal"] == 0
    assert res["degree"]["bands"] == {"1": 2, "2": 4}
    assert res["degree"]["total"] <= 6
    assert res["periodicity"]["kind"] == "periodic"


def test_output_is_deterministic(capsys, tmp_path):
    cfg = write(tmp_path, dict(FREE_DOC, diagonal={"kind": "cosine", "amplitude": 1.0,
                                                   "frequency": 3.883222077450933}))
    outs = [run_cli(capsys, "spectrum", "--config", cfg, "--schedule", QUICK, "--jobs", j)[1]
            for j in ("1", "3", "1")]
    assert outs[0] == outs[1] == outs[2]
