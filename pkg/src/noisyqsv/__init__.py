"""Quantum state verification under readout noise."""

from . import config, hypothesis, noise, opcore, sim, spectral, states, worstcase

__version__ = "0.1.0"

__all__ = ["config", "hypothesis", "noise", "opcore", "sim", "spectral", "states", "worstcase"]
