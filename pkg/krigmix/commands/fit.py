"""
`krigmix fit <config>`: run the posterior approximation and write its outputs
"""
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from loguru import logger

from ..files.config_file import load_config
from ..files.mixture_file import SavedMixture, save_mixture
from ..files.writers import (
    marginal_quantiles,
    write_diagnostics,
    write_marginals,
    write_samples,
    write_summary,
)
from ..sampling.engine import IterationDiagnostics, run
from ..sampling.mixture import NormalMixture, mixture_sample
from ..sampling.priors import ParameterLayout, natural_samples
from .common import load_dataset, missing_input

MARGINAL_DRAWS = 1000
# SeedSequence spawn keys: the engine owns the plain seed
MARGINAL_STREAM = 1
OUTPUT_STREAM = 2


def add_parser(subparsers):
    parser = subparsers.add_parser("fit", help="approximate the parameter posterior")
    parser.add_argument("config", help="run configuration file")
    parser.add_argument("--threads", type=int, default=None, help="worker cap (overrides KRIG_THREADS)")
    parser.set_defaults(handler=run_fit, usage=parser.format_usage)
    return parser


def run_fit(args) -> int:
    config_path = Path(args.config)
    if not config_path.is_file():
        return missing_input(args, config_path, "configuration file")
    config = load_config(config_path)
    spec = config.model.spec()
    dataset = load_dataset(config)
    layout = ParameterLayout.from_model(spec)
    seed = config.run.seed

    marginal_rng = np.random.default_rng(np.random.SeedSequence([seed, MARGINAL_STREAM]))
    marginals: List[Dict] = []

    def record(k: int, mixture: NormalMixture, diagnostics: Optional[IterationDiagnostics]):
        draws = mixture_sample(mixture, MARGINAL_DRAWS, marginal_rng)
        marginals.extend(marginal_quantiles(k, layout.names, natural_samples(draws, layout)))

    mixture, history = run(
        config.run,
        spec,
        dataset,
        config.prior,
        workers=args.threads,
        on_iteration=record,
    )

    output_rng = np.random.default_rng(np.random.SeedSequence([seed, OUTPUT_STREAM]))
    working = mixture_sample(mixture, config.run.samples, output_rng)
    natural = natural_samples(working, layout)

    out = config.io.output_dir
    write_diagnostics(out / "diagnostics.csv", history)
    write_samples(out / "samples_working.csv", layout.names, working)
    write_samples(out / "samples_natural.csv", layout.names, natural)
    write_summary(out / "summary.csv", layout, natural)
    write_marginals(out / "marginals.csv", marginals)
    mixture_path = save_mixture(
        config.io.mixture_path,
        SavedMixture(names=layout.names, mixture=mixture, history=history),
    )
    logger.info(f"fit finished after {len(history)} iterations; mixture saved to {mixture_path}")
    return 0
