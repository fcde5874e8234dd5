"""Stochastic block models with categorical node attributes.

Graph generation, spectral detectability thresholds and belief-propagation
inference, plus a sweep harness for phase-transition experiments.
"""

from .bp import BPConfig, BPState, OverlapScore, hard_assign, init_state, overlap, run, sweep
from .branching import GrowthEstimate, simulate_perturbation_growth
from .errors import (
    BudgetExceeded,
    ConstraintViolation,
    DegenerateInput,
    EqualDegreeViolation,
    ModelError,
    NumericalDegeneracy,
    ParseError,
)
from .graphs import AttributedGraph, read_graph, read_labels, write_graph
from .model import (
    AttributeEncoder,
    ModelParams,
    SymmetricSpec,
    aggregated_degrees,
    average_degree,
    check_equal_degree,
    encode_attributes,
    expand_symmetric,
    resolve_abc,
)
from .oracle import exact_marginals, run_full_pairwise
from .rng import RngSeed, cell_seed
from .sampling import (
    attribute_layout,
    generate,
    sample_communities,
    sample_graph,
    sample_graph_naive,
)
from .spectral import (
    CriticalEpsilon,
    EdgeTypeSystem,
    ThresholdReport,
    XiCriteria,
    build_edge_type_system,
    build_m1,
    build_m2,
    critical_epsilon,
    second_eigenvalue,
    shifted_decoding_mismatches,
    spectral_radius,
    spectral_radius_dense,
    spectral_radius_power,
    threshold_report,
    transfer_spectral_radii,
    transition_second_eigenvalues,
    xi_criteria,
)
from .harness import SweepConfig, SweepRow, run_cell, run_sweep

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
