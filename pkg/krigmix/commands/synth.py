"""
`krigmix synth`: write an observation file drawn from known parameters
"""
from pathlib import Path

import numpy as np
from loguru import logger

from ..files.writers import write_observations
from ..model.types import CorrelationParams, NaturalParams, TrendSpec
from ..synthetic import synthesize


def add_parser(subparsers):
    parser = subparsers.add_parser("synth", help="synthetic observations from known parameters")
    parser.add_argument("output", help="observation file to write")
    parser.add_argument("--n", type=int, default=50, help="number of locations")
    parser.add_argument("--d", type=int, default=2, choices=(1, 2, 3), help="spatial dimension")
    parser.add_argument("--domain-size", type=float, default=1.0, help="side of the square domain")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--beta", type=float, nargs="+", default=[0.0], help="trend coefficients")
    parser.add_argument("--sigma2", type=float, default=1.0)
    parser.add_argument("--tau", type=float, default=0.1)
    parser.add_argument("--kappa", type=float, default=1.5)
    parser.add_argument("--scale", type=float, nargs="+", default=[0.3], help="one scale, or two with --angle")
    parser.add_argument("--angle", type=float, default=None, help="rotation in (0, pi/2), 2-D only")
    parser.set_defaults(handler=run_synth, usage=parser.format_usage)
    return parser


def run_synth(args) -> int:
    theta = NaturalParams(
        beta=tuple(args.beta),
        tau=args.tau,
        sigma2=args.sigma2,
        corr=CorrelationParams(kappa=args.kappa, scales=tuple(args.scale), angle=args.angle),
    )
    if len(args.beta) == 1:
        trend = TrendSpec(kind="constant", dimension=args.d)
    else:
        trend = TrendSpec(kind="linear", dimension=args.d)
    dataset = synthesize(
        theta,
        args.n,
        args.d,
        np.random.default_rng(args.seed),
        domain_size=args.domain_size,
        trend=trend,
    )
    path = write_observations(Path(args.output), dataset.locations, dataset.values)
    logger.info(f"wrote {dataset.n} synthetic observations to {path}")
    return 0
