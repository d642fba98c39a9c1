"""
Shared helpers for the subcommand handlers
"""
import sys
from pathlib import Path

from loguru import logger

from ..core.errors import ConfigError
from ..files.config_file import ConfigFile
from ..files.observations import load_linear_data, load_observations
from ..model.types import Dataset

# exit code for usage problems: missing or unreadable inputs named on the command line
USAGE = 2


def missing_input(args, path: Path, what: str) -> int:
    message = f"{what} not found: {path}"
    logger.error(message)
    print(args.usage(), end="", file=sys.stderr)
    print(f"error: {message}", file=sys.stderr)
    return USAGE


def load_dataset(config: ConfigFile) -> Dataset:
    io = config.io
    if io.observations is None:
        raise ConfigError("io.observations is required")
    transform = config.model.transform()
    if io.h_matrix is not None:
        return load_linear_data(io.observations, io.support, io.h_matrix, config.model.dimension, transform)
    return load_observations(io.observations, config.model.dimension, transform)
