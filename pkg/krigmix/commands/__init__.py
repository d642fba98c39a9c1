"""
CLI subcommands
"""
from . import diagnose, fit, simulate, synth

SUBCOMMANDS = (fit, simulate, diagnose, synth)

__all__ = ["SUBCOMMANDS", "fit", "simulate", "diagnose", "synth"]
