"""Pinsker bound toolkit: minimax kernel density estimation and its least favorable family."""

__version__ = "0.1.0"

from .grid import Grid, GridFunction, SobolevClass, SpectralFunction  # noqa
from .kernel import KernelSpec, pinsker_constant  # noqa
