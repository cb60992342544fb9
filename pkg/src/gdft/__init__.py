"""Generalized density functional toolkit.

Constrained-search functionals, representability polytopes, boundary
forces and Kirwan polytopes for finite-dimensional functional theories.
"""

from .core import FunctionalTheory, QuantumState, build_theory, ground_energy, make_theory
from .errors import GdftError

__version__ = "0.1.0"

__all__ = ["FunctionalTheory", "QuantumState", "GdftError", "build_theory", "ground_energy", "make_theory"]
