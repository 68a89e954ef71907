from __future__ import annotations

import re
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from elliptic_face.cli import (
    SUITES,
    SuiteConfig,
    main,
    parse_complex,
    print_tables,
    run_suite,
)
from elliptic_face.errors import ConfigError
from elliptic_face.weights import face_weight

# the slow suites run at full size in the acceptance module
SMALL = {"theta": 20, "weights": 3, "ybe": 3, "fusion": 2, "fused_ybe": 0, "operators": 0, "characters": 12, "gauge": 4}


@pytest.mark.parametrize(
    "text, value",
    [("0.123+0.0456i", 0.123 + 0.0456j), ("0.123,0.0456", 0.123 + 0.0456j), ("1i", 1j), ("-2", -2), ("0+1j", 1j)],
)
def test_parse_complex(text, value):
    assert parse_complex(text) == value


def test_parse_complex_rejects_garbage():
    with pytest.raises(ConfigError):
        parse_complex("one")


@given(
    re_=st.floats(-3, 3, allow_nan=False),
    im=st.floats(0.1, 3, allow_nan=False),
    seed=st.integers(0, 10**6),
    sweep=st.integers(0, 50),
)
def test_config_text_round_trip(re_, im, seed, sweep):
    cfg = SuiteConfig(tau=complex(re_, im), seed=seed, sweep={k: sweep for k in SUITES})
    assert SuiteConfig.from_text(cfg.to_text()) == cfg


@pytest.mark.parametrize(
    "key, value",
    [("rank", "1"), ("tau", "0-1i"), ("sweep.nosuch", "3"), ("colour", "red"), ("sweep", "-1"), ("tol", "0")],
)
def test_bad_config_fields(key, value):
    with pytest.raises(ConfigError):
        SuiteConfig().with_field(key, value)


def test_theta_suite_passes_with_defaults():
    report = run_suite("theta")
    assert report.ok and report.records


def test_empty_sweep_gives_empty_passing_report():
    report = run_suite("ybe", SuiteConfig(sweep={"ybe": 0}))
    assert report.records == [] and report.ok
    assert "scope=total checks=0 failed=0 status=pass" in report.body()


def test_all_suites_report_and_determinism(monkeypatch):
    cfg = SuiteConfig(seed=5, sweep=dict(SMALL))
    monkeypatch.setenv("ELLIPTIC_FACE_THREADS", "1")
    first = run_suite("all", cfg)
    monkeypatch.setenv("ELLIPTIC_FACE_THREADS", "3")
    second = run_suite("all", cfg)
    assert first.body() == second.body()
    assert first.ok, [r.line() for r in first.records if not r.passed]
    summary = first.body().split("[summary]\n")[1]
    assert len(re.findall(r"^suite=\w+ checks=", summary, flags=re.M)) >= 8
    for line in first.body().splitlines():
        if line.startswith("suite=") and " case=" in line:
            assert all("=" in field for field in line.split())


def test_different_seed_changes_digests():
    a = run_suite("theta", SuiteConfig(seed=1, sweep={"theta": 10}))
    b = run_suite("theta", SuiteConfig(seed=2, sweep={"theta": 10}))
    assert [r.digest for r in a.records] != [r.digest for r in b.records]


def test_pole_becomes_failed_case():
    cfg = SuiteConfig(hbar=1 / 3, sweep={"weights": 2})
    report = run_suite("weights", cfg)
    assert not report.ok
    assert any(r.reason == "pole" for r in report.records)


def test_exit_status(capsys):
    assert main(["run", "--suite", "theta", "--sweep", "20"]) == 0
    assert main(["run", "--suite", "theta", "--sweep", "20", "--tol", "1e-30"]) == 1
    assert main(["run", "--suite", "theta", "--hbar", "zero"]) == 2
    out = capsys.readouterr().out
    assert "status=fail reason=exceeds_tol" in out


def test_config_file_and_output_file(tmp_path):
    conf = tmp_path / "run.conf"
    out = tmp_path / "report.txt"
    conf.write_text("# small run\nseed=3\nsweep.theta=15\nhbar=0.1,0.02\n")
    assert main(["run", "--suite", "theta", "--config", str(conf), "--out", str(out)]) == 0
    text = out.read_text()
    assert text.startswith("suite=theta case=")
    assert re.search(r"^wall_time_s=", text, flags=re.M)


def test_defaults_command(capsys):
    assert main(["defaults", "--seed", "9"]) == 0
    text = capsys.readouterr().out
    assert "seed=9" in text and "sweep.ybe=200" in text
    assert SuiteConfig.from_text(text).seed == 9


def test_unknown_threads_setting_is_rejected(monkeypatch):
    monkeypatch.setenv("ELLIPTIC_FACE_THREADS", "lots")
    with pytest.raises(ConfigError):
        run_suite("theta", SuiteConfig(sweep={"theta": 1}))


def test_tables_carry_every_tag():
    text = print_tables(SuiteConfig())
    for tag in ["2-5a", "2-5b", "2-5c", "2-5d", "2-5e", "ex1", "ex2", "ex3", "sign1", "deg2part", "degzero"]:
        assert f"tag={tag} " in text
    assert "table=Mtilde1" in text and "table=Mtilde2" in text


def test_tables_values_match_library_and_identity_at_zero():
    cfg = SuiteConfig()
    lam = [0.31 + 0.02j, 0.17 - 0.01j]
    text = print_tables(cfg, lam, 0.0)
    for line in text.splitlines():
        if not line.startswith("table=W11 "):
            continue
        fields = dict(item.split("=", 1) for item in line.split())
        steps = [tuple(int(c) for c in fields[k].strip("()").split(",")) for k in ("top", "left", "right")]
        value = parse_complex(fields["value"])
        assert value == pytest.approx(complex(face_weight(np.array(lam), *steps, 0.0, cfg.params)), abs=1e-15)
        assert value == pytest.approx(1.0 if steps[0] == steps[1] else 0.0, abs=1e-13)
    assert "composed=unavailable:projection" in text and "value=unavailable:pole" in text


def test_tables_listed_matches_composed():
    for line in print_tables(SuiteConfig()).splitlines():
        if "composed=" in line and "unavailable" not in line:
            fields = dict(item.split("=", 1) for item in line.split())
            a, b = parse_complex(fields["value"]), parse_complex(fields["composed"])
            assert abs(a - b) < 1e-9 * (1 + abs(a))


def test_module_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "elliptic_face", "run", "--suite", "theta", "--sweep", "5"],
        capture_output=True, text=True, check=False,
    )
    assert out.returncode == 0
    assert "scope=total" in out.stdout
