"""Numerics for goldfish-type many-body systems and their commuting Hamiltonians."""

from . import errors, flow, hamfam, poisson, polycore, sepvar
from .errors import *  # noqa: F401,F403
from .hamfam import EtaFamily, ObservableSet, PhaseState, builtin_family, observables
from .polycore import NodeValueSet, Polynomial, RootSet

__version__ = "0.1.0"
