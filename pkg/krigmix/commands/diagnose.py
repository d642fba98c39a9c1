"""
`krigmix diagnose <mixture-file>`: print the stored convergence history
"""
from pathlib import Path

from ..files.mixture_file import load_mixture
from .common import missing_input


def add_parser(subparsers):
    parser = subparsers.add_parser("diagnose", help="print the gamma / d_L1 history of a saved mixture")
    parser.add_argument("mixture", help="mixture file written by `fit`")
    parser.set_defaults(handler=run_diagnose, usage=parser.format_usage)
    return parser


def run_diagnose(args) -> int:
    path = Path(args.mixture)
    if not path.is_file():
        return missing_input(args, path, "mixture file")
    saved = load_mixture(path)
    print(f"parameters: {', '.join(saved.names)}")
    print(f"components: {saved.mixture.size}")
    print(f"{'k':>3} {'n':>6} {'gamma':>8} {'d_L1':>8} {'r*':>8} {'h*':>10} {'failed':>7}")
    for entry in saved.history:
        print(
            f"{entry.k:>3} {entry.n:>6} {entry.gamma:>8.4f} {entry.d_l1:>8.4f} "
            f"{entry.r_star:>8.4g} {entry.h_star:>10.4g} {entry.zero_weight_count:>7}"
        )
    return 0
