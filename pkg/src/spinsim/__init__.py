"""Numerics for nuclear spin-lattice ordering.

Dipolar lattice sums, single-spin semi-invariants, the high-temperature
series, constant-entropy ADRF sweeps, Weiss mean-field ordering, average
Hamiltonian theory for pulse cycles, and exact small-cluster oracles.
"""
__version__ = "0.1.0"

from .lattice import (
    CouplingTable,
    LatticeSpec,
    LatticeSums,
    SpeciesSpec,
    build_sites,
    compute_lattice_sums,
    coupling_table,
    geometric_factor,
    lattice_sum_In,
    lattice_sum_K3,
    local_field_BL,
    sum_A_squared,
)
from .semiinv import SemiInvariantSet, f_j, semi_invariants, t_n
from .hte import Order, ThermoState, tc_from_susceptibility
from .adrf import AdrfCurve, initial_entropy, solve_beta, sweep
from .meanfield import MeanFieldResult, critical_polarization, scan_bz, transition_temperature
from .aht import CouplingMatrix3, PulseSequence, average_coupling, toggling_frames
from .cluster import ClusterSpec, compare_propagators, exact_thermal

__all__ = [
    "AdrfCurve", "ClusterSpec", "CouplingMatrix3", "CouplingTable", "LatticeSpec",
    "LatticeSums", "MeanFieldResult", "Order", "PulseSequence", "SemiInvariantSet",
    "SpeciesSpec", "ThermoState", "average_coupling", "build_sites", "compare_propagators",
    "compute_lattice_sums", "coupling_table", "critical_polarization", "exact_thermal",
    "f_j", "geometric_factor", "initial_entropy", "lattice_sum_In", "lattice_sum_K3",
    "local_field_BL", "scan_bz", "semi_invariants", "solve_beta", "sum_A_squared", "sweep",
    "t_n", "tc_from_susceptibility", "toggling_frames", "transition_temperature",
]
