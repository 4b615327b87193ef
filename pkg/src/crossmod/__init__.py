"""Lattice models built on crossed modules of finite groups."""
from .algebra import (CrossedModule, FiniteGroup, builtin_modules, cokernel, image, kernel,
                      validate_crossed_module)
from .complexes import CellComplex, Face, FaceTerm, SphereWord, builtin_complexes, validate_complex
from .configuration import Configuration, enumerate_fake_flat, holonomy1, holonomy2
from .errors import (CapExceeded, GaugeInvarianceError, MalformedWord, ParseError,
                     StructureError, WeightError)
from .hamiltonian import StateBasis, Weights, assemble, physical_projector, solve_model, spectrum
from .oracle import ground_count

__all__ = [
    "CrossedModule", "FiniteGroup", "builtin_modules", "cokernel", "image", "kernel",
    "validate_crossed_module", "CellComplex", "Face", "FaceTerm", "SphereWord",
    "builtin_complexes", "validate_complex", "Configuration", "enumerate_fake_flat",
    "holonomy1", "holonomy2", "CapExceeded", "GaugeInvarianceError", "MalformedWord",
    "ParseError", "StructureError", "WeightError", "StateBasis", "Weights", "assemble",
    "physical_projector", "solve_model", "spectrum", "ground_count",
]
