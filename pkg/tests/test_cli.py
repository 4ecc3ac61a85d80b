import hashlib
import json

import pytest

from bhlab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_twin(capsys):
    code, out, _ = run(capsys, "check", "--tuple", "X,X+2")
    assert code == 0
    assert "admissible: yes" in out and "shift N: 0" in out


def test_check_inadmissible(capsys):
    code, _, err = run(capsys, "check", "--tuple", "X,X+1")
    assert code == 2
    assert "p = 2" in err


def test_check_reducible_and_undetermined(capsys):
    assert run(capsys, "check", "--tuple", "X^2-1")[0] == 2
    assert run(capsys, "check", "--tuple", "X^4+X^2+1")[0] == 2
    assert run(capsys, "check", "--tuple", "X^4+X^2+1", "--assume-irreducible")[0] == 0


def test_constants_csv(capsys):
    code, out, _ = run(capsys, "constants", "--tuple", "X,X+2", "--cutoff", "1e5,1e6")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "tuple_hash,P,direct,mertens,spread"
    h, P, direct, mertens, spread = lines[2].split(",")
    assert P == "1000000" and abs(float(direct) - 1.32032) < 1e-4


def test_predict(capsys):
    code, out, _ = run(capsys, "predict", "--tuple", "X", "--x", "100", "--cutoff", "1000")
    assert code == 0
    assert out.splitlines()[0] == "x,M"


def test_count_oracle_json(capsys):
    code, out, _ = run(capsys, "count", "--model", "oracle", "--tuple", "X,X+2", "--x", "100", "--no-timestamp")
    doc = json.loads(out)
    assert code == 0 and doc["counts"][0]["count"] == 8
    assert doc["config"]["tuple"] == [[0, 1], [2, 1]]
    assert "timestamp" not in doc


def test_timestamp_present_by_default(capsys):
    _, out, _ = run(capsys, "count", "--model", "oracle", "--tuple", "X", "--x", "100")
    assert "timestamp" in json.loads(out)


def test_series(capsys, tmp_path):
    out_path = tmp_path / "s.csv"
    code, _, _ = run(capsys, "series", "--model", "oracle", "--x", "1000,10000", "--out", str(out_path))
    rows = out_path.read_text().splitlines()
    assert code == 0 and rows[0] == "x,count,M,delta" and rows[1].startswith("1000,35,")


def test_sample_bitmap_reproducible(capsys, tmp_path):
    a, b = tmp_path / "a.bits", tmp_path / "b.bits"
    for path, threads in ((a, "1"), (b, "4")):
        code, out, _ = run(capsys, "sample", "--model", "m2", "--seed", "7", "--range", "10:100000",
                           "--out", str(path), "--threads", threads, "--no-timestamp")
        assert code == 0
    assert hashlib.sha256(a.read_bytes()).digest() == hashlib.sha256(b.read_bytes()).digest()


def test_simulate_json_fields(capsys):
    code, out, _ = run(capsys, "simulate", "--tuple", "X,X+2", "--model", "m2", "--seed", "7",
                       "--x", "10000", "--trials", "4", "--no-timestamp")
    doc = json.loads(out)
    assert code == 0
    for key in ("spec", "tuple", "x", "y", "trials", "mean", "exact_mean", "variance", "M", "var_over_M2",
                "seeds_hash", "config"):
        assert key in doc


def test_config_file_and_flag_override(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"tuple": "X", "model": {"kind": "oracle"}, "x": [100]}))
    code, out, _ = run(capsys, "count", "--config", str(cfg), "--no-timestamp")
    assert json.loads(out)["counts"][0]["count"] == 25
    code, out, _ = run(capsys, "count", "--config", str(cfg), "--tuple", "X,X+2", "--no-timestamp")
    assert json.loads(out)["counts"][0]["count"] == 8


def test_unknown_config_key(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"tuple": "X", "colour": "red"}))
    code, _, err = run(capsys, "check", "--config", str(cfg))
    assert code == 2 and "colour" in err


def test_paper_profile_accepted_with_warning(capsys):
    code, _, err = run(capsys, "check", "--tuple", "X,X+2", "--model", "m1", "--profile", "paper",
                       "--range", "1000:10000")
    assert code == 0 and "warning" in err


def test_model_profile_object(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"tuple": "X", "model": {"kind": "m2", "seed": 3, "t": {"exp_pow": 0.6}, "z": {"pow": 0.5}}}))
    code, out, _ = run(capsys, "simulate", "--config", str(cfg), "--x", "10000", "--trials", "3", "--no-timestamp")
    doc = json.loads(out)
    assert code == 0 and doc["config"]["profile"]["t"] == {"exp_pow": 0.6}


def test_verify_pair_and_factorization(capsys):
    code, out, _ = run(capsys, "verify", "pair", "--toy-primes", "3,5,7")
    assert code == 0 and json.loads(out)["cases"] == 50
    code, _, _ = run(capsys, "verify", "factorization", "--tuple", "X,X+2", "--range", "100:3000")
    assert code == 0
    code, _, _ = run(capsys, "verify", "pair", "--toy-primes", "3,7")
    assert code == 2


def test_runtime_error_exit_code(capsys):
    code, _, err = run(capsys, "count", "--model", "oracle", "--tuple", "X^3+2", "--x", "1e6")
    assert code == 1 and "budget" in err


def test_cache_build_and_clear(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("BH_LAB_CACHE", str(tmp_path))
    code, out, _ = run(capsys, "cache", "build", "--bound", "10000", "--tuple", "X,X+2")
    assert code == 0 and "1229" in out
    assert list(tmp_path.glob("localdata-*.csv"))
    code, _, _ = run(capsys, "constants", "--tuple", "X,X+2", "--cutoff", "10000")
    assert code == 0
    assert run(capsys, "cache", "clear")[0] == 0
    assert not list(tmp_path.glob("localdata-*.csv"))
