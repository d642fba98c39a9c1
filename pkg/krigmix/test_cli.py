"""
End-to-end tests of the command-line interface
"""
import pytest

from krigmix.files import read_grid
from krigmix.main import main


def _config(tmp_path, name="run.cfg", output="out", extra=""):
    path = tmp_path / name
    path.write_text(
        "model.dimension = 1\n"
        "model.fixed.kappa = 0.5\n"
        "run.n0 = 40\n"
        "run.k_max = 2\n"
        "run.samples = 50\n"
        "run.seed = 4\n"
        "simulate.grid.origin = 0\n"
        "simulate.grid.cell_size = 0.1\n"
        "simulate.grid.counts = 10\n"
        "simulate.s = 3\n"
        "io.observations = obs.csv\n"
        f"io.output_dir = {output}\n" + extra,
        encoding="utf-8",
    )
    return path


@pytest.fixture
def observations(tmp_path):
    path = tmp_path / "obs.csv"
    code = main(["synth", str(path), "--n", "30", "--d", "1", "--seed", "3", "--beta", "2.0", "--scale", "0.3"])
    assert code == 0
    return path


def test_no_subcommand_is_a_usage_error():
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2


def test_missing_config_exits_with_usage_code(tmp_path, capsys):
    assert main(["fit", str(tmp_path / "nope.cfg")]) == 2
    err = capsys.readouterr().err
    assert "usage: krigmix fit " in err
    assert "error: configuration file not found" in err
    assert main(["simulate", str(tmp_path / "nope.cfg")]) == 2
    assert main(["diagnose", str(tmp_path / "nope.txt")]) == 2


def test_synth_writes_observations(observations):
    lines = observations.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "x,value"
    assert len(lines) == 31


def test_fit_writes_outputs(tmp_path, observations):
    assert main(["fit", str(_config(tmp_path))]) == 0
    out = tmp_path / "out"
    diagnostics = (out / "diagnostics.csv").read_text(encoding="utf-8").splitlines()
    assert diagnostics[0] == "k,n,gamma,d_l1,r_star,h_star,zero_weight_count"
    assert len(diagnostics) == 3
    samples = (out / "samples_natural.csv").read_text(encoding="utf-8").splitlines()
    assert samples[0] == "beta,scale,sigma2,tau"
    assert len(samples) == 51
    summary = (out / "summary.csv").read_text(encoding="utf-8").splitlines()
    assert summary[-1].startswith("kappa,fixed,0.5,")
    marginals = (out / "marginals.csv").read_text(encoding="utf-8").splitlines()
    assert len(marginals) == 1 + 3 * 4
    assert (out / "mixture.txt").is_file()


def test_fit_stops_early_on_gamma(tmp_path, observations):
    config = _config(tmp_path, extra="run.gamma_stop = 0.000001\n")
    assert main(["fit", str(config)]) == 0
    assert len((tmp_path / "out" / "diagnostics.csv").read_text(encoding="utf-8").splitlines()) == 2


def test_fit_is_reproducible(tmp_path, observations):
    assert main(["fit", str(_config(tmp_path, "a.cfg", "a")), "--threads", "1"]) == 0
    assert main(["fit", str(_config(tmp_path, "b.cfg", "b")), "--threads", "3"]) == 0
    for name in ("diagnostics.csv", "samples_working.csv", "summary.csv", "marginals.csv", "mixture.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_simulate_and_diagnose(tmp_path, observations, capsys):
    config = _config(tmp_path)
    assert main(["fit", str(config)]) == 0
    assert main(["simulate", str(config)]) == 0
    out = tmp_path / "out"
    assert read_grid(out / "ensemble.csv").shape == (3, 10)
    assert read_grid(out / "median.csv").shape == (1, 10)
    assert read_grid(out / "sd.csv").min() >= 0.0
    first = (out / "ensemble.csv").read_bytes()
    assert main(["simulate", str(config)]) == 0
    assert (out / "ensemble.csv").read_bytes() == first

    capsys.readouterr()
    assert main(["diagnose", str(out / "mixture.txt")]) == 0
    printed = capsys.readouterr().out.splitlines()
    assert printed[0] == "parameters: beta, scale, sigma2, tau"
    assert len(printed) == 3 + 2


def test_simulate_needs_two_realizations(tmp_path, observations, capsys):
    single = _config(tmp_path, "single.cfg")
    single.write_text(single.read_text(encoding="utf-8").replace("simulate.s = 3", "simulate.s = 1"), encoding="utf-8")
    assert main(["simulate", str(single)]) == 1
    assert "ParameterError" in capsys.readouterr().err


def test_simulate_without_mixture_is_a_usage_error(tmp_path, observations):
    assert main(["simulate", str(_config(tmp_path))]) == 2


def test_invalid_config_reports_error(tmp_path, observations, capsys):
    config = _config(tmp_path, extra="run.bogus = 1\n")
    assert main(["fit", str(config)]) == 1
    assert "ValidationError" in capsys.readouterr().err
