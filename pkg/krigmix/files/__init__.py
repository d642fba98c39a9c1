"""
Readers, writers and the run configuration file
"""
from .config_file import ConfigFile, load_config, parse_config
from .mixture_file import SavedMixture, load_mixture, save_mixture
from .observations import load_h_matrix, load_linear_data, load_observations
from .writers import (
    marginal_quantiles,
    read_grid,
    write_diagnostics,
    write_ensemble,
    write_grid,
    write_marginals,
    write_observations,
    write_samples,
    write_summary,
)

__all__ = [
    "ConfigFile",
    "load_config",
    "parse_config",
    "SavedMixture",
    "save_mixture",
    "load_mixture",
    "load_observations",
    "load_linear_data",
    "load_h_matrix",
    "write_diagnostics",
    "write_observations",
    "write_samples",
    "write_summary",
    "marginal_quantiles",
    "write_marginals",
    "write_grid",
    "write_ensemble",
    "read_grid",
]
