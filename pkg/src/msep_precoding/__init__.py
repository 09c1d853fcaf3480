"""Minimum symbol-error-probability precoding for phase-quantized MU-MIMO.

A numpy/scipy library for constant-envelope downlink precoding with PSK
signaling: exact (QPSK) and union-bound SEP objectives, convex-hull
relaxations with projection heuristics, an optimal branch-and-bound solver
with a QoS early-exit variant, and a reproducible Monte Carlo SER harness.
"""

from .bnb import (
    BnbConfig,
    BnbOutcome,
    Incumbent,
    NodeRecord,
    exhaustive_mmddt,
    exhaustive_msep,
    prune,
    solve_bnb,
    solve_bnb_qos,
)
from .convex import (
    Polyhedron,
    RelaxedSolution,
    SolverConfig,
    SubPolyhedron,
    build_polyhedron,
    find_strictly_feasible,
    restrict_polyhedron,
    solve_relaxed,
    solve_subproblem,
)
from .model import (
    PrecodingInstance,
    PskAlphabet,
    ReceivedSample,
    count_symbol_errors,
    generate_channel,
    hard_detect,
    to_complex,
    to_real,
    transmit,
)
from .objectives import (
    QmsepData,
    UbmsepData,
    UbmsepDomainError,
    build_qmsep,
    build_ubmsep,
    mddt,
    qmsep_gradient,
    qmsep_hessian,
    qmsep_objective,
    sep_qmsep,
    sep_ubmsep_bound,
    ubmsep_gradient,
    ubmsep_hessian,
    ubmsep_objective,
)
from .projection import (
    coordinate_objective,
    project_full_gs,
    project_partial_gs,
    project_uq,
)
from .sim import (
    METHODS,
    ExperimentConfig,
    PrecoderFailure,
    SerPoint,
    compare_methods,
    run_ser,
    snr_to_sigma,
)

__version__ = "0.1.0"
