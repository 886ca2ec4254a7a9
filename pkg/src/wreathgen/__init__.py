"""Finite generation of iterated wreath products of permutation groups."""

__version__ = "0.1.0"

from .errors import CapError, InputError, InvariantError, MissingConstantError, WreathgenError
from .permcore import Permutation, PermGroup
from .tower import TowerSpec

__all__ = ["CapError", "InputError", "InvariantError", "MissingConstantError", "Permutation",
           "PermGroup", "TowerSpec", "WreathgenError", "__version__"]
