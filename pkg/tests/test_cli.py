import subprocess
import sys

import pytest

from yosida.cli import ConfigError, load_config, main


def run(*args, cwd):
    return subprocess.run([sys.executable, "-m", "yosida", *args], cwd=cwd, capture_output=True, text=True)


@pytest.fixture
def small_scan(tmp_path):
    cfg = tmp_path / "wp.ini"
    cfg.write_text("[experiment]\nfunction = weierstrass\nout = out\n\n[region]\nradius = 6\n")
    return cfg


def test_catalog_lists_functions(tmp_path):
    r = run("catalog", "--out", "cat", cwd=tmp_path)
    assert r.returncode == 0
    assert "weierstrass" in r.stdout and "bank_kaufman" in r.stdout
    assert (tmp_path / "cat" / "catalog.csv").exists()


def test_unknown_function_is_usage_error(tmp_path):
    r = run("growth", "--function", "nonesuch", cwd=tmp_path)
    assert r.returncode == 2
    assert "nonesuch" in r.stderr


def test_unknown_config_key_is_usage_error(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[region]\nradius = 5\nwobble = 1\n")
    r = run("scan", "--config", str(cfg), cwd=tmp_path)
    assert r.returncode == 2
    with pytest.raises(ConfigError):
        load_config("[nowhere]\nx = 1\n")


def test_scan_reuses_cache_and_is_reproducible(tmp_path, small_scan):
    first = run("scan", "--config", str(small_scan), cwd=tmp_path)
    assert first.returncode == 0, first.stderr
    assert "computed" in first.stdout
    target = tmp_path / "out" / "weierstrass.pointset"
    text = target.read_text()
    second = run("scan", "--config", str(small_scan), cwd=tmp_path)
    assert "cache hit" in second.stdout
    assert target.read_text() == text
    # a damaged cache entry is detected and recomputed to the same bytes
    entry = next((tmp_path / "out" / "cache").glob("*.pointset"))
    entry.write_text(entry.read_text().replace("pole", "zero", 1))
    third = run("scan", "--config", str(small_scan), cwd=tmp_path)
    assert "computed" in third.stdout
    assert target.read_text() == text


def test_verify_single_suite(tmp_path):
    r = run("verify", "--suite", "schmiegung", "--out", "v", cwd=tmp_path)
    assert r.returncode == 0, r.stdout + r.stderr
    assert r.stdout.startswith("[PASS]")
    assert (tmp_path / "v" / "verify.txt").read_text().strip() == r.stdout.strip()


def test_verify_unknown_suite():
    assert main(["verify", "--suite", "nonesuch"]) == 2


def test_painleve_subcommand_writes_trajectory(tmp_path):
    cfg = tmp_path / "p.ini"
    cfg.write_text("[experiment]\nout = pl\n\n[painleve]\nr_max = 6.5\ntol = 1e-9\n")
    r = run("painleve", "--config", str(cfg), cwd=tmp_path)
    assert r.returncode == 0, r.stderr
    names = {p.name for p in (tmp_path / "pl").iterdir()}
    assert "painleve.json" in names and any(n.endswith(".trajectory") for n in names)
