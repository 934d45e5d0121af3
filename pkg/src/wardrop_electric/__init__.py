"""Electrical-network tools for single-link design in Wardrop routing games."""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    Degenerate,
    Disconnected,
    InconsistentMultipliers,
    LinkUnsupported,
    NetworkError,
    NoPath,
    NotConverged,
    NotSeriesParallel,
    ParseError,
    SingularSystem,
    Unreachable,
    ZeroFlowLink,
)
from .localres import (
    ResistanceBounds,
    average_relative_gap,
    cut_at_distance,
    resistance_bounds,
    scan_all_links,
    short_at_distance,
)
from .ndp import (
    Intervention,
    InterventionCostModel,
    LinearCost,
    NdpResult,
    algorithm1,
    algorithm1_nonlinear,
    check_assumption1,
    delta_cost_derivative,
    delta_cost_electrical,
    delta_cost_exact,
    error_bound,
    optimize_single_link,
)
from .netcore import DirectedNetwork, is_series_parallel, prune, validate
from .resistor import (
    ResistorNet,
    effective_resistance,
    effective_resistances,
    from_affine,
    from_nonlinear,
    greens_function,
    solve_voltage,
    spanning_tree_centrality,
)
from .walks import HittingQuery, gap_rhs, hit_before, return_escape, term1, term2
from .wardrop import (
    AffineGame,
    Equilibrium,
    GeneralGame,
    PolynomialDelay,
    kkt_residual,
    min_throughput,
    social_cost,
    solve_affine,
    solve_convex,
)
