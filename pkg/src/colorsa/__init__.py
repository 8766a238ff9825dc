"""Simulated-annealing decoders for triangular (4.8.8) color codes."""

__version__ = "0.1.0"

from .anneal import AnnealOutcome, AnnealSchedule, anneal, default_betas, table_schedule
from .decoder import DecodeResult, OracleInfeasible, decode, exact_minimize, score
from .hamiltonian import (
    IsingProblem,
    build_bitflip,
    build_depolarizing,
    build_phenomenological,
    reconstruct_error,
)
from .lattice import Face, Lattice, build_lattice, logical_overlap_parity, pure_error, syndrome
from .noise import NoiseModel, SampledError, SpaceTimeSyndrome, sample_code_capacity, sample_phenomenological

__all__ = [
    "AnnealOutcome", "AnnealSchedule", "DecodeResult", "Face", "IsingProblem", "Lattice",
    "NoiseModel", "OracleInfeasible", "SampledError", "SpaceTimeSyndrome", "anneal",
    "build_bitflip", "build_depolarizing", "build_lattice", "build_phenomenological", "decode",
    "default_betas", "exact_minimize", "logical_overlap_parity", "pure_error",
    "reconstruct_error", "sample_code_capacity", "sample_phenomenological", "score",
    "syndrome", "table_schedule",
]
