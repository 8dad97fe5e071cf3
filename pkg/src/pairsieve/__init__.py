"""Lattice SVP/CVP by discrete Gaussian sampling and pair-and-average sieving."""

__version__ = "0.1.0"

from .gaussian import CosetMassTable, coset_masses, klein_sample, mass_truncated, rho, squared_coset_sampler
from .lattice import (
    CosetLabel,
    LatticeBasis,
    LatticePoint,
    SampleList,
    Shift,
    average,
    coset_label,
    gen_random_lattice,
    gram_schmidt,
    parse_basis,
    serialize_basis,
)
from .reduction import ReductionConfig, babai_nearest_plane, hkz_reduce, lll_reduce
from .sieve import pair_and_average, prepare_start, reject_and_average
from .solvers import SolverParams, SolverResult, solve_cvp, solve_svp
from .verify import enum_cvp, enum_svp

__all__ = [
    "CosetLabel", "CosetMassTable", "LatticeBasis", "LatticePoint", "ReductionConfig", "SampleList", "Shift",
    "SolverParams", "SolverResult", "average", "babai_nearest_plane", "coset_label", "coset_masses", "enum_cvp",
    "enum_svp", "gen_random_lattice", "gram_schmidt", "hkz_reduce", "klein_sample", "lll_reduce",
    "mass_truncated", "pair_and_average", "parse_basis", "prepare_start", "reject_and_average", "rho",
    "serialize_basis", "solve_cvp", "solve_svp", "squared_coset_sampler",
]
