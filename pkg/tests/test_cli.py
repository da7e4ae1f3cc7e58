import csv
import json
from fractions import Fraction

import pytest

from hypertamper.cli import ConfigError, RunOptions, SCAN_COLUMNS, load_config, main
from hypertamper.hypercube import Variant


@pytest.fixture
def out(tmp_path, monkeypatch):
    monkeypatch.setenv("HYPERTAMPER_OUT", str(tmp_path / "env-out"))
    return tmp_path


def read_json(path):
    return json.loads(path.read_text())


def test_tv_exact_prints_fraction(out, capsys):
    assert main(["tv", "--variant", "zero", "--n", "2", "--p", "1/2", "--exact"]) == 0
    assert "9/16" in capsys.readouterr().out
    report = read_json(out / "env-out" / "tv.json")
    assert report["metrics"][0]["value"] == "9/16"
    assert report["metrics"][0]["exact"] is True
    assert report["checks"][0]["ok"] is True


def test_verify_quick(out, capsys):
    assert main(["verify", "--quick", "--out", str(out)]) == 0
    report = read_json(out / "verify.json")
    assert {c["name"] for c in report["checks"]} >= {"size_bias_identity", "dp_equals_oracle", "t_sum_identity"}


def test_identities(out):
    assert main(["identities", "--out", str(out)]) == 0


def test_scan_schema_and_reproducibility(out):
    argv = ["scan", "--variant", "all", "--gamma", "1.0,2.0", "--n", "4,5", "--samples", "200", "--seed", "7"]
    assert main(argv + ["--out", str(out / "a")]) == 0
    assert main(argv + ["--out", str(out / "b"), "--workers", "2"]) == 0
    a = (out / "a" / "scan.csv").read_bytes()
    assert a == (out / "b" / "scan.csv").read_bytes()
    rows = list(csv.reader(a.decode().splitlines()))
    assert rows[0] == SCAN_COLUMNS
    assert rows[0][:10] == ["variant", "n", "gamma", "p", "EN", "mean_N", "tv_est", "tv_se", "var_ratio", "p_zero"]
    assert len(rows) == 5
    assert [r[-1] for r in rows[1:]] == ["0", "1", "2", "3"]
    report = read_json(out / "a" / "scan.json")
    assert all(m["seed"] == 7 for m in report["metrics"])


def test_sample_rows_unique_and_reproducible(out):
    argv = ["sample", "--n", "3", "--p", "1/2", "--samples", "50", "--seed", "3", "--hex"]
    main(argv + ["--out", str(out / "a")])
    main(argv + ["--out", str(out / "b")])
    a = (out / "a" / "sample.csv").read_text()
    assert a == (out / "b" / "sample.csv").read_text()
    rows = list(csv.DictReader(a.splitlines()))
    assert len({(r["seed"], r["replicate"]) for r in rows}) == 50


def test_count_with_oracle(out, capsys):
    assert main(["count", "--n", "3", "--full", "--variant", "all", "--out", str(out)]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "24"
    assert main(["count", "--n", "3", "--hex", "0", "--variant", "zero", "--out", str(out)]) == 0


def test_overlap_exact(out, capsys):
    assert main(["overlap", "--n", "3", "--variant", "zero", "--exact", "--p", "1/2", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "W=2: 0" in text and "E[p^-W] = 5/2" in text


def test_examples_run(out):
    assert main(["example-ham", "--n", "6", "--p", "1/2", "--samples", "100", "--out", str(out)]) == 0
    assert main(["example-lis", "--n", "50", "--k", "10", "--samples", "100", "--out", str(out)]) == 0
    report = read_json(out / "example_lis.json")
    assert report["checks"][0]["ok"]


@pytest.mark.parametrize(
    "argv",
    [
        ["tv", "--bogus"],
        ["frobnicate"],
        ["tv", "--p", "1/2", "--gamma", "1"],
        ["count", "--n", "30", "--full"],
        ["count", "--n", "14", "--full"],
        ["tv", "--n", "4", "--p", "1/2", "--exact"],
        ["tv", "--n", "4", "--gamma", "5"],
    ],
)
def test_usage_and_cap_errors_exit_2(out, argv):
    assert main(argv + ["--out", str(out)] if argv[0] != "frobnicate" else argv) == 2


def test_load_config_defaults(tmp_path):
    cfg = tmp_path / "empty.cfg"
    cfg.write_text("")
    assert load_config(cfg) == RunOptions()


def test_load_config_gamma_with_flag_n(tmp_path, out):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# scan setup\ngamma = 2.0\nvariant = zero\nseed = 4\n")
    opts = load_config(cfg).merged({"n": [8]})
    [(params, gamma)] = opts.params()
    assert params.p == 0.25 and gamma == 2.0 and params.variant is Variant.FROM_ZERO
    assert main(["tv", "--config", str(cfg), "--n", "8", "--samples", "50", "--out", str(out)]) == 0
    report = read_json(out / "tv.json")
    assert report["params"]["cells"] == [{"n": 8, "p": 0.25, "gamma": 2.0}]


def test_flags_override_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("p = 1/3\nn = 2,3\n")
    opts = load_config(cfg)
    assert opts.p == Fraction(1, 3) and opts.n == [2, 3]
    over = opts.merged({"gamma": [1.0]})
    assert over.p is None and over.gamma == [1.0]


@pytest.mark.parametrize(
    "text,line",
    [("p = 1/2\ngamma = 2\n", 2), ("n = 3\nfoo = 1\n", 2), ("seed = x\n", 1), ("just words\n", 1), ("n=2\nn=3\n", 2)],
)
def test_load_config_errors(tmp_path, text, line):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    with pytest.raises(ConfigError, match=f":{line}:"):
        load_config(cfg)


def test_config_error_exit_code(tmp_path, out, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("p = 1/2\ngamma = 2\n")
    assert main(["tv", "--config", str(cfg), "--out", str(out)]) == 2
    assert "bad.cfg:2" in capsys.readouterr().err


def test_failed_check_exit_1(out, monkeypatch):
    from hypertamper import verify
    from hypertamper.report import Check

    monkeypatch.setattr(verify, "quick_suite", lambda: [Check("broken", False, {"n": 1})])
    assert main(["verify", "--quick", "--out", str(out)]) == 1
    report = read_json(out / "verify.json")
    assert report["checks"] == [{"name": "broken", "ok": False, "witness": {"n": 1}}]
