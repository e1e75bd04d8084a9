"""Experiments, one module per runner subcommand.

Importing this package registers every experiment in ``EXPERIMENTS``.
"""

from suzuki_lab.experiments import (  # noqa: F401
    enumeration,
    field_check,
    girth,
    nonconc,
    sl2_trace,
    spectral_gap,
    twisted_counts,
    walk,
    word_laws,
)
from suzuki_lab.experiments.registry import EXPERIMENTS, RunContext, get_experiment


__all__ = ["EXPERIMENTS", "RunContext", "get_experiment"]
