"""
`krigmix simulate <config>`: posterior predictive ensemble and its median / sd maps
"""
from pathlib import Path

import numpy as np
from loguru import logger

from ..core.errors import ConfigError, ParameterError
from ..files.config_file import load_config
from ..files.mixture_file import load_mixture
from ..files.writers import write_ensemble, write_grid
from ..sampling.priors import ParameterLayout
from ..simulate.ensemble import posterior_predictive, summarize_ensemble
from .common import load_dataset, missing_input


def add_parser(subparsers):
    parser = subparsers.add_parser("simulate", help="conditional simulation from a fitted mixture")
    parser.add_argument("config", help="run configuration file")
    parser.add_argument("--threads", type=int, default=None, help="worker cap (overrides KRIG_THREADS)")
    parser.set_defaults(handler=run_simulate, usage=parser.format_usage)
    return parser


def run_simulate(args) -> int:
    config_path = Path(args.config)
    if not config_path.is_file():
        return missing_input(args, config_path, "configuration file")
    config = load_config(config_path)
    options = config.simulate
    if options.grid is None:
        raise ConfigError("simulate.grid.origin, simulate.grid.cell_size and simulate.grid.counts are required")
    if options.s < 2:
        raise ParameterError(f"the sd map needs simulate.s >= 2, got {options.s}")
    mixture_path = config.io.mixture_path
    if not mixture_path.is_file():
        return missing_input(args, mixture_path, "mixture file")

    saved = load_mixture(mixture_path)
    spec = config.model.spec()
    layout = ParameterLayout.from_model(spec)
    if saved.names != layout.names:
        raise ConfigError(
            f"mixture parameters {saved.names} do not match the configured model {layout.names}"
        )
    dataset = load_dataset(config)
    grid = options.grid.grid()
    if grid.dimension != spec.dimension:
        raise ConfigError(f"grid is {grid.dimension}-D, model is {spec.dimension}-D")

    logger.info(f"simulating {options.s} realizations on {grid.size} cells")
    ensemble = posterior_predictive(
        saved.mixture,
        dataset,
        grid,
        options.s,
        np.random.default_rng(options.seed),
        spec=spec,
        back_transform=options.transform(),
        predict_smooth_only=options.predict_smooth_only,
        block_size=options.block_size,
        max_neighbors=options.max_neighbors,
        workers=args.threads,
    )
    median, sd = summarize_ensemble(ensemble)

    out = config.io.output_dir
    write_ensemble(out / "ensemble.csv", grid, ensemble.realizations)
    write_grid(out / "median.csv", grid, median)
    write_grid(out / "sd.csv", grid, sd)
    logger.info(f"wrote ensemble, median and sd maps to {out}")
    return 0
