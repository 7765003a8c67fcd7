import json
import subprocess
import sys

import pytest

from ifgi.cli import run_cli
from ifgi.sample import save_mask, synthesize


def run_json(capsys, *argv):
    assert run_cli(list(argv)) == 0
    return json.loads(capsys.readouterr().out)


def test_transfer_example(capsys):
    out = run_json(capsys, "transfer", "--m", "5", "--gamma0", "0", "--gamma1", "0")
    assert out["chi_b0"] == pytest.approx(0.778093214025868835, rel=1e-12)
    assert out["absorption_weight"] == pytest.approx(0.394570950286893473, rel=1e-12)
    assert len(out["chi_abs"]) == 5


def test_cnr_example(capsys):
    out = run_json(capsys, "cnr", "--m", "1", "--gamma0", "0", "--gamma1", "0", "--k", "1000", "--jp", "500", "--jb", "500")
    assert out["cnr"] == pytest.approx(1.40858902573966586, rel=1e-12)
    assert out["note"] == "traditional reduction"


def test_cnr_no_note_for_chain(capsys):
    assert "note" not in run_json(capsys, "cnr", "--m", "5", "--jp", "10", "--jb", "10")


def test_optimize(capsys):
    out = run_json(capsys, "optimize", "--m", "10", "--alpha", "4")
    assert out["gamma0_star"] == pytest.approx(0.18033238750831515, abs=1e-11)
    assert abs(out["residual"]) <= 1e-10


def test_optimize_no_root_is_runtime_error(capsys):
    assert run_cli(["optimize", "--m", "10", "--alpha", "0.001"]) == 1
    assert "NoRoot" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv, flag",
    [
        (["transfer", "--m", "0"], "--m"),
        (["transfer", "--m", "3", "--gamma0", "1.5"], "--gamma0"),
        (["cnr", "--m", "3", "--jp", "0", "--jb", "1"], "--jp"),
        (["cnr", "--m", "3", "--k", "1", "--jp", "2", "--jb", "1"], "--k"),
        (["simulate", "--m", "3", "--u", "-1"], "--u"),
        (["simulate", "--m", "3", "--k", "1"], "--k"),
        (["sweep", "--figure", "fig7"], "--figure"),
        (["sweep", "--figure", "fig5", "--gamma-max", "1"], "--grid/--gamma-max"),
        (["optimize", "--m", "1", "--alpha", "1"], "--m"),
        (["optimize", "--m", "4", "--alpha", "0"], "--alpha"),
        ([], "command"),
    ],
)
def test_argument_errors_exit_2(capsys, argv, flag):
    assert run_cli(argv) == 2
    assert flag in capsys.readouterr().err


def test_missing_mask_exit_2(tmp_path, capsys):
    assert run_cli(["simulate", "--m", "2", "--mask", str(tmp_path / "none.pbm"), "--out", str(tmp_path)]) == 2
    assert "--mask" in capsys.readouterr().err


def test_malformed_mask_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.pbm"
    bad.write_text("P1\n2 2\n0 1\n")
    assert run_cli(["simulate", "--m", "2", "--mask", str(bad), "--out", str(tmp_path)]) == 2
    assert "line" in capsys.readouterr().err


@pytest.mark.parametrize("sub", ["transfer", "cnr", "simulate", "sweep", "optimize"])
def test_help_lists_flags(capsys, sub):
    assert run_cli([sub, "--help"]) == 0
    text = capsys.readouterr().out
    assert "--m" in text or "--figure" in text


def _simulate(out, *extra, mask=None):
    argv = ["simulate", "--m", "5", "--k", "2000", "--u", "100", "--seed", "42", "--out", str(out)]
    if mask:
        argv += ["--mask", str(mask)]
    return run_cli(argv + list(extra))


def test_simulate_example_bit_identical(tmp_path, capsys):
    mask = tmp_path / "checker32.pbm"
    save_mask(synthesize("checkerboard", 32, 32), mask)
    before = mask.read_bytes()
    assert _simulate(tmp_path / "a", mask=mask) == 0
    assert _simulate(tmp_path / "b", mask=mask) == 0
    assert _simulate(tmp_path / "c", "--threads", "3", mask=mask) == 0
    assert mask.read_bytes() == before
    for name in ("image.csv", "image.pgm", "report.json"):
        ref = (tmp_path / "a" / name).read_bytes()
        assert (tmp_path / "b" / name).read_bytes() == ref
        assert (tmp_path / "c" / name).read_bytes() == ref
    report = json.loads((tmp_path / "a" / "report.json").read_text())
    assert 0.85 <= report["report"]["cnr_empirical"] / report["report"]["cnr_analytic"] <= 1.15
    assert report["config"]["seed"] == 42
    assert not list(tmp_path.glob("a/*.tmp*"))


def test_simulate_output_dir_from_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("IFGI_OUTPUT_DIR", str(tmp_path / "env"))
    assert run_cli(["simulate", "--m", "2", "--k", "50", "--width", "4", "--height", "4"]) == 0
    assert (tmp_path / "env" / "report.json").exists()


def test_sweep_writes_csv_and_manifest(tmp_path, capsys):
    argv = ["sweep", "--figure", "fig3", "--m", "5", "--alpha", "1", "--grid", "11", "--out"]
    assert run_cli(argv + [str(tmp_path / "a")]) == 0
    assert run_cli(argv + [str(tmp_path / "b"), "--threads", "2"]) == 0
    a = (tmp_path / "a" / "fig3.csv").read_bytes()
    assert a == (tmp_path / "b" / "fig3.csv").read_bytes()
    assert a.splitlines()[0] == b"M,alpha,gamma0,gamma1,K_over_Kprime,cnr_ratio,no_advantage,min_bucket_ratio"
    assert len(a.splitlines()) == 1 + 121
    manifest = json.loads((tmp_path / "a" / "fig3_manifest.json").read_text())
    assert manifest["spec"]["M_values"] == [5]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "ifgi", "transfer", "--m", "2"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["M"] == 2
