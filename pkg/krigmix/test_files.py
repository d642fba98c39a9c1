"""
Tests for the observation, H matrix, mixture and configuration files and the CSV writers
"""
import numpy as np
import pytest
from loguru import logger
from pydantic import ValidationError

from krigmix.core.errors import ConfigError, DataFormatError, RankError
from krigmix.files import (
    SavedMixture,
    load_config,
    load_h_matrix,
    load_linear_data,
    load_mixture,
    load_observations,
    marginal_quantiles,
    parse_config,
    read_grid,
    save_mixture,
    write_diagnostics,
    write_grid,
    write_observations,
)
from krigmix.sampling import IterationDiagnostics, NormalMixture
from krigmix.simulate import PredictionGrid, ValueTransform


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_load_observations(tmp_path):
    rng = np.random.default_rng(0)
    rows = rng.uniform(size=(29, 3))
    lines = ["x1,x2,value"] + [",".join(repr(float(v)) for v in row) for row in rows]
    data = load_observations(_write(tmp_path / "obs.csv", "\n".join(lines) + "\n"), 2)
    assert data.n == 29 and data.d == 2
    np.testing.assert_array_equal(data.locations, rows[:, :2])
    np.testing.assert_array_equal(data.values, rows[:, 2])


def test_single_observation_with_comments_and_blank_lines(tmp_path):
    path = _write(tmp_path / "obs.csv", "# survey\nx,value\n\n0.5,1.25\n")
    data = load_observations(path, 1)
    assert data.n == 1
    assert data.values[0] == 1.25


def test_header_only_file_rejected(tmp_path):
    with pytest.raises(DataFormatError, match="no observations"):
        load_observations(_write(tmp_path / "obs.csv", "x1,x2,value\n"), 2)


def test_malformed_row_reports_line(tmp_path):
    path = _write(tmp_path / "obs.csv", "x,value\n0.1,2.0\n0.2,abc\n")
    with pytest.raises(DataFormatError) as info:
        load_observations(path, 1)
    assert info.value.line == 3
    assert ":3:" in str(info.value)


def test_wrong_column_count_rejected(tmp_path):
    with pytest.raises(DataFormatError, match="header has 2 columns"):
        load_observations(_write(tmp_path / "obs.csv", "x,value\n0.1,2.0\n"), 2)


def test_duplicate_locations_warn(tmp_path):
    messages = []
    sink = logger.add(messages.append, level="WARNING")
    try:
        load_observations(_write(tmp_path / "obs.csv", "x,value\n0.5,1.0\n0.5,2.0\n0.7,0.0\n"), 1)
    finally:
        logger.remove(sink)
    assert any("more than once" in str(m) for m in messages)


def test_data_transform_applied_and_checked(tmp_path):
    path = _write(tmp_path / "obs.csv", "x,value\n0.0,1.0\n1.0,2.718281828459045\n")
    data = load_observations(path, 1, ValueTransform(kind="log"))
    np.testing.assert_allclose(data.values, [0.0, 1.0])
    bad = _write(tmp_path / "bad.csv", "x,value\n0.0,-1.0\n")
    with pytest.raises(DataFormatError):
        load_observations(bad, 1, ValueTransform(kind="log"))


def test_write_observations_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    locations, values = rng.normal(size=(7, 2)), rng.normal(size=7)
    data = load_observations(write_observations(tmp_path / "obs.csv", locations, values), 2)
    np.testing.assert_array_equal(data.locations, locations)
    np.testing.assert_array_equal(data.values, values)


def test_load_h_matrix(tmp_path):
    path = _write(tmp_path / "h.csv", "row,col,weight\n0,0,0.25\n0,1,0.5\n0,0,0.25\n1,2,1\n")
    H = load_h_matrix(path, 3)
    np.testing.assert_array_equal(H, [[0.5, 0.5, 0.0], [0.0, 0.0, 1.0]])


def test_h_matrix_rank_and_index_checks(tmp_path):
    with pytest.raises(RankError):
        load_h_matrix(_write(tmp_path / "h.csv", "0,0,1\n1,0,2\n"), 2)
    with pytest.raises(DataFormatError, match="column index 5"):
        load_h_matrix(_write(tmp_path / "h2.csv", "0,5,1\n"), 3)


def test_load_linear_data(tmp_path):
    support = _write(tmp_path / "support.csv", "x\n0.0\n0.5\n1.0\n")
    values = _write(tmp_path / "values.csv", "value\n0.3\n")
    h = _write(tmp_path / "h.csv", "0,0,0.5\n0,2,0.5\n")
    data = load_linear_data(values, support, h, 1)
    assert data.n == 3 and data.m == 1
    np.testing.assert_array_equal(data.H, [[0.5, 0.0, 0.5]])


def test_mixture_round_trip_is_bit_identical(tmp_path):
    rng = np.random.default_rng(2)
    n, p = 6, 3
    factors = np.tril(rng.normal(size=(n, p, p)))
    idx = np.arange(p)
    factors[:, idx, idx] = np.abs(factors[:, idx, idx]) + 0.1
    weights = rng.dirichlet(np.ones(n))
    weights[-1] = 1.0 - weights[:-1].sum()
    mixture = NormalMixture(means=rng.normal(size=(n, p)) * 1e3, factors=factors, weights=weights)
    history = [
        IterationDiagnostics(k=1, n=40, gamma=0.51234, d_l1=0.8, r_star=0.5, h_star=0.0312, zero_weight_count=2)
    ]
    path = save_mixture(tmp_path / "mix.txt", SavedMixture(names=["beta", "scale", "sigma2"], mixture=mixture, history=history))
    loaded = load_mixture(path)
    assert loaded.names == ["beta", "scale", "sigma2"]
    np.testing.assert_array_equal(loaded.mixture.means, mixture.means)
    np.testing.assert_array_equal(loaded.mixture.factors, mixture.factors)
    np.testing.assert_array_equal(loaded.mixture.weights, mixture.weights)
    assert loaded.history == history


def test_mixture_file_rejects_other_files(tmp_path):
    with pytest.raises(DataFormatError, match="not a mixture file"):
        load_mixture(_write(tmp_path / "mix.txt", "hello\n"))
    with pytest.raises(DataFormatError, match="unexpected end of file"):
        load_mixture(_write(tmp_path / "cut.txt", "# krigmix-mixture v1\nnames a\ncomponents 1 1\nweights\n"))


def test_parse_config():
    tree = parse_config(
        "model.dimension = 2   # plane\n"
        "model.fixed.kappa = 1.5\n"
        "simulate.grid.counts = 41, 74\n"
    )
    assert tree == {
        "model": {"dimension": "2", "fixed": {"kappa": "1.5"}},
        "simulate": {"grid": {"counts": ["41", "74"]}},
    }
    with pytest.raises(ConfigError, match="duplicate key"):
        parse_config("run.seed = 1\nrun.seed = 2\n")
    with pytest.raises(ConfigError, match="section prefix"):
        parse_config("seed = 1\n")


def test_load_config(tmp_path):
    path = _write(
        tmp_path / "run.cfg",
        "model.dimension = 2\n"
        "model.anisotropic = true\n"
        "model.fixed.kappa = 1.5\n"
        "prior.nugget_beta = 2, 8\n"
        "run.n0 = 300\n"
        "run.gamma_stop = 0.9\n"
        "simulate.grid.origin = 0, 0\n"
        "simulate.grid.cell_size = 0.5, 0.5\n"
        "simulate.grid.counts = 41, 74\n"
        "simulate.s = 20\n"
        "io.observations = data/obs.csv\n",
    )
    config = load_config(path)
    spec = config.model.spec()
    assert spec.anisotropic and spec.fixed == {"kappa": 1.5}
    assert config.prior.nugget_beta == (2.0, 8.0)
    assert config.run.n0 == 300 and config.run.gamma_stop == 0.9
    assert config.simulate.grid.grid().size == 41 * 74
    assert config.io.observations == tmp_path / "data" / "obs.csv"
    assert config.io.mixture_path == tmp_path / "output" / "mixture.txt"


def test_config_rejects_unknown_keys(tmp_path):
    with pytest.raises(ValidationError):
        load_config(_write(tmp_path / "run.cfg", "run.n_zero = 300\n"))
    with pytest.raises(ValidationError):
        load_config(_write(tmp_path / "run2.cfg", "io.h_matrix = h.csv\n"))
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")


def test_grid_file_round_trip(tmp_path):
    grid = PredictionGrid(origin=(0.0, 0.0), cell_size=(1.0, 1.0), counts=(41, 74))
    values = np.random.default_rng(3).normal(size=grid.size)
    path = write_grid(tmp_path / "median.csv", grid, values)
    table = read_grid(path)
    assert table.shape == (41, 74)
    assert table.size == 3034
    np.testing.assert_array_equal(table.ravel(), values)
    assert path.read_text(encoding="utf-8").splitlines()[0] == grid.header()


def test_write_diagnostics(tmp_path):
    history = [
        IterationDiagnostics(k=1, n=40, gamma=0.5, d_l1=0.25, r_star=1.0, h_star=0.1, zero_weight_count=0, wallclock=3.0)
    ]
    lines = write_diagnostics(tmp_path / "diagnostics.csv", history).read_text(encoding="utf-8").splitlines()
    assert lines == ["k,n,gamma,d_l1,r_star,h_star,zero_weight_count", "1,40,0.5,0.25,1,0.10000000000000001,0"]


def test_marginal_quantiles():
    natural = np.arange(101, dtype=float).reshape(-1, 1)
    (row,) = marginal_quantiles(2, ["sigma2"], natural)
    assert row["k"] == 2 and row["parameter"] == "sigma2"
    assert [row[key] for key in ("q05", "q25", "q50", "q75", "q95")] == pytest.approx([5.0, 25.0, 50.0, 75.0, 95.0])
