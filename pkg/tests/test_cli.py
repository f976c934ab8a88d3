import subprocess
import sys

import numpy as np
import pytest

from decaylab import __version__
from decaylab.cli import EXIT_OK, EXIT_PHYSICS, EXIT_USAGE, EXIT_VERIFY, build_config, main, read_config_file
from decaylab.presets import get_preset


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_csv(text):
    comments = [ln for ln in text.splitlines() if ln.startswith("#")]
    rows = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    header = rows[0].split(",")
    data = np.array([[float(x) for x in r.split(",")] for r in rows[1:]])
    return comments, header, data


def test_evolve_k0_csv(capsys):
    code, out, _ = run(capsys, "evolve", "--preset", "K0", "--points", "5")
    assert code == EXIT_OK
    comments, header, data = parse_csv(out)
    assert comments[0] == f"# decaylab {__version__}"
    assert "# preset: K0" in comments
    assert header[0] == "t" and header[-5:] == ["p_K0", "p_K0bar", "p_vac", "closure", "strangeness"]
    assert data.shape == (5, len(header))
    assert data[0, header.index("p_K0")] == 1.0
    assert np.all(np.abs(data[:, header.index("closure")] - 1) <= 1e-12)
    # exactly one header row
    assert sum(1 for ln in out.splitlines() if ln.startswith("t,")) == 1


def test_twelve_significant_digits(capsys):
    _, out, _ = run(capsys, "evolve", "--preset", "K0", "--points", "3")
    body = [ln for ln in out.splitlines() if ln and not ln.startswith(("#", "t,"))]
    digits = [len(tok.lstrip("-").split("e")[0].replace(".", "").lstrip("0")) for ln in body for tok in ln.split(",")]
    assert max(digits) == 12


def test_output_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["figure", "fig2", "--preset", "B0", "--points", "50", "--out", str(a)]) == 0
    assert main(["figure", "fig2", "--preset", "B0", "--points", "50", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_evolve_pi0_survival(capsys):
    p = get_preset("pi0").params
    code, out, _ = run(capsys, "evolve", "--preset", "pi0", "--t-stop", repr(1 / p.gamma), "--points", "2")
    assert code == 0
    _, header, data = parse_csv(out)
    assert data[-1, header.index("p_pi0")] == pytest.approx(0.367879441171, abs=1e-12)


def test_evolve_p_k0_at_tau_s(capsys):
    tau = get_preset("K0").params.tau_S
    code, out, _ = run(capsys, "evolve", "--preset", "k0", "--lambda", "0", "--t-stop", repr(tau), "--points", "2")
    _, header, data = parse_csv(out)
    assert data[-1, header.index("p_K0")] == pytest.approx(0.6111, abs=1e-4)


@pytest.mark.parametrize("initial", ["K0", "K0bar", "KS", "KL", "K1", "K2", "vacuum"])
def test_evolve_initial_states(capsys, initial):
    code, out, _ = run(capsys, "evolve", "--preset", "B0", "--initial", initial, "--points", "4")
    assert code == 0
    _, header, data = parse_csv(out)
    assert np.all(np.abs(data[:, header.index("closure")] - 1) <= 1e-12)


def test_bounds_report(capsys):
    code, out, _ = run(capsys, "bounds", "--preset", "K0")
    assert code == 0
    assert "inside" in out and "ok                     true" in out
    assert "lambda_max [1/s]       1363118" in out


def test_bounds_csv(capsys, tmp_path):
    path = tmp_path / "b.csv"
    assert main(["bounds", "--preset", "B0", "--out", str(path)]) == 0
    comments, header, data = parse_csv(path.read_text())
    assert header == ["t", "lambda_lower", "lambda_upper"]
    assert any(c.startswith("# lambda_max:") for c in comments)
    assert np.all(data[:, 1] < 0)


def test_figures(capsys):
    code, out, _ = run(capsys, "figure", "fig1", "--preset", "K0")
    assert code == 0
    _, header, data = parse_csv(out)
    assert header == ["t", "discriminant", "scaled_discriminant"]
    assert np.all(data[:, 1] >= 0)
    assert np.allclose(data[:, 2], 3.27e-3 ** 2 * data[:, 1], rtol=1e-10)
    code, out, _ = run(capsys, "figure", "fig2", "--preset", "K0")
    _, header, data = parse_csv(out)
    assert np.all(data[:, 1] < 0)
    # default grid spans 1e-3..1e3 t_plus
    assert data[-1, 0] / data[0, 0] == pytest.approx(1e6)


def test_config_file_with_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# K0 run\npreset = K0\npoints = 3\nlambda = 1e9\nt-stop = 1e-10  # seconds\n")
    code, out, _ = run(capsys, "evolve", "--config", str(cfg), "--points", "4")
    assert code == 0
    comments, _, data = parse_csv(out)
    assert data.shape[0] == 4
    assert data[-1, 0] == pytest.approx(1e-10)
    assert any("lambda=1000000000" in c for c in comments)


def test_config_parsing():
    cfg = build_config({"lambda": "6.582119e-13 MeV", "log": "true"}, {"points": "7", "preset": None})
    assert cfg.lam == pytest.approx(6.582119e-13 / 6.58211915e-22, rel=1e-12)
    assert cfg.log is True and cfg.points == 7 and cfg.preset == "K0"


def test_mev_suffix_on_command_line(capsys):
    code, out, _ = run(capsys, "evolve", "--preset", "K0", "--lambda", "1e-12MeV", "--points", "2")
    assert code == 0
    assert f"lambda={1e-12 / 6.58211915e-22:.12g}" in out


@pytest.mark.parametrize("argv", [
    ["evolve", "--preset", "D0"],
    ["evolve", "--points", "1"],
    ["evolve", "--t-start", "2", "--t-stop", "1"],
    ["evolve", "--t-start", "-1"],
    ["evolve", "--log", "--t-start", "0", "--t-stop", "1"],
    ["evolve", "--preset", "pi0", "--initial", "K0"],
    ["evolve", "--points", "many"],
    ["bounds", "--preset", "pi0"],
    ["figure", "fig3"],
    ["evolve", "--delta-l", "1.5"],
    ["frobnicate"],
    ["evolve", "--no-such-flag"],
])
def test_usage_errors(capsys, argv):
    code = main(argv) if argv[0] != "frobnicate" and "--no-such-flag" not in argv else None
    if code is None:
        with pytest.raises(SystemExit) as info:
            main(argv)
        code = info.value.code
    assert code == EXIT_USAGE


def test_config_errors(capsys, tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("color = blue\n")
    assert main(["evolve", "--config", str(bad)]) == EXIT_USAGE
    bad.write_text("just words\n")
    assert main(["evolve", "--config", str(bad)]) == EXIT_USAGE
    assert main(["evolve", "--config", str(tmp_path / "missing.cfg")]) == EXIT_USAGE
    with pytest.raises(Exception):
        read_config_file(tmp_path / "missing.cfg")


def test_physics_violations(capsys):
    code, out, _ = run(capsys, "bounds", "--preset", "K0", "--delta-l", "0.1")
    assert code == EXIT_PHYSICS
    assert "VIOLATED" in out and "ok                     false" in out
    code, _, err = run(capsys, "evolve", "--preset", "K0", "--lambda-scale", "1.2")
    assert code == EXIT_PHYSICS and "lambda_max" in err
    code, _, _ = run(capsys, "figure", "fig2", "--preset", "B0", "--delta-l", "0.9", "--delta-m", "1e13")
    assert code == EXIT_PHYSICS
    code, _, _ = run(capsys, "evolve", "--preset", "pi0", "--lambda", "1e15", "--z", "50")
    assert code == EXIT_PHYSICS


def test_verify_failure_reports_witness(capsys):
    code, out, _ = run(capsys, "verify", "--preset", "B0", "--lambda-scale", "1.1")
    assert code == EXIT_VERIFY
    line = next(ln for ln in out.splitlines() if ln.startswith("choi_psd"))
    assert "FAIL" in line and "t=" in line


def test_verify_reduction_suite_only_scalar(capsys, monkeypatch, tmp_path):
    monkeypatch.setenv("DECAYLAB_THREADS", "1")
    path = tmp_path / "v.csv"
    code, out, _ = run(capsys, "verify", "--preset", "pi0", "--out", str(path))
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "suite,max_residual,tolerance,passed,detail"
    assert any(ln.startswith("reduction_delta0,") and ",pass," in ln for ln in lines)
    assert path.read_text().startswith("# decaylab")


def test_console_entry_points():
    for cmd in (["decaylab", "--version"], [sys.executable, "-m", "decaylab", "--version"]):
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0 and __version__ in proc.stdout
    proc = subprocess.run(["decaylab", "bounds", "--preset", "B0"], capture_output=True, text=True)
    assert proc.returncode == 0 and "inside" in proc.stdout
    proc = subprocess.run(["decaylab", "evolve", "--points", "0"], capture_output=True, text=True)
    assert proc.returncode == 1
