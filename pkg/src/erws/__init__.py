"""Elephant random walk with stops: simulation, exact moments and checks."""

__version__ = "0.1.0"

from .model import ModelParams, Regime, classify, from_ab, make_params  # noqa: E402,F401
