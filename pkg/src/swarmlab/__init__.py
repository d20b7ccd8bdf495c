"""Swarm and evolutionary optimizers with benchmark and motor-identification harnesses."""
from ._accel import backend
from .core import BoundaryPolicy, RunStats, SearchSpace, make_rng, run_seed, summarize_runs

__version__ = "0.1.0"

__all__ = ["BoundaryPolicy", "RunStats", "SearchSpace", "backend", "make_rng", "run_seed",
           "summarize_runs", "__version__"]
