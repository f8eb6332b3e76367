"""Continuous-time quantum-walk spatial search on finite triangular lattices."""

from .generators import SearchParams, classical_generator, quantum_hamiltonian
from .lattice import (
    Graph,
    TargetSpec,
    automorphism_orbit,
    build_from_coords,
    build_hex_patch,
    build_paper31,
    resolve_target,
)
from .photonics import BeamSpec, CouplingLaw, WaveguideArraySpec, fit_coupling_law
from .propagator import Eigensystem, eig_symmetric, evolve_classical, evolve_quantum, expm, ode_oracle
from .search import (
    EvolutionSeries,
    RatioSeries,
    ScalingRecord,
    SpatialSearch,
    beta_size_surface,
    beta_time_heatmap,
    optimal_time,
    ratio_series,
    run_search,
    scaling_study,
    uniform_state,
)

__version__ = "0.1.0"
