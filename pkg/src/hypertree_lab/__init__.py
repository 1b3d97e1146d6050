"""Desk-scale lab for 2-dimensional determinantal hypertrees."""

__version__ = "0.1.0"

from .faces import CocycleGraph, Complex2, CycleFamily, Hypertree
from .dpp import ProjectionKernel, build_kernel, inclusion_prob, sample
from .seeding import SeedScheme, SplitMix64

__all__ = [
    "CocycleGraph",
    "Complex2",
    "CycleFamily",
    "Hypertree",
    "ProjectionKernel",
    "SeedScheme",
    "SplitMix64",
    "build_kernel",
    "inclusion_prob",
    "sample",
]
