"""Topologically sensitive metaheuristics (TVNS, TEM) and persistence analysis."""

from .domain import (
    BinarySolution,
    Problem,
    RealSolution,
    SetCoverInstance,
    euclidean,
    evaluate_onemax,
    evaluate_rastrigin,
    evaluate_setcover,
    evaluate_sphere,
    hamming,
    onemax,
    rastrigin,
    read_setcover,
    setcover,
    sphere,
)
from .simplex import (
    Archive,
    Mode,
    NeighborhoodParams,
    Simplex,
    balanced_extension,
    enumerate_simplices_containing,
    extension_candidates,
    is_simplex,
)
from .tda import (
    Barcode,
    Filtration,
    PersistenceInterval,
    RipsPersistence,
    SimplicialComplex,
    betti_numbers,
    build_rips,
    compute_persistence,
    is_boundary,
    persistence_vs_k,
    regularity_report,
)
from .tem import EM, TEM, TemConfig, run_em, run_tem
from .tvns import TVNS, VNS, ScheduleState, TvnsConfig, next_neighborhood, run_tvns, run_vns

__version__ = "0.1.0"

__all__ = [
    "Archive", "Barcode", "BinarySolution", "EM", "Filtration", "Mode", "NeighborhoodParams",
    "PersistenceInterval", "Problem", "RealSolution", "RipsPersistence", "ScheduleState",
    "SetCoverInstance", "Simplex", "SimplicialComplex", "TEM", "TVNS", "TemConfig",
    "TvnsConfig", "VNS", "balanced_extension", "betti_numbers", "build_rips",
    "compute_persistence", "enumerate_simplices_containing", "euclidean", "evaluate_onemax",
    "evaluate_rastrigin", "evaluate_setcover", "evaluate_sphere", "extension_candidates",
    "hamming", "is_boundary", "is_simplex", "next_neighborhood", "onemax", "persistence_vs_k",
    "rastrigin", "read_setcover", "regularity_report", "run_em", "run_tem", "run_tvns",
    "run_vns", "setcover", "sphere",
]
