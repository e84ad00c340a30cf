"""Numerical laboratory for local maximal operators, weighted fractional
Sobolev seminorms on grids, and nonlocal capacity minimization."""

__version__ = "0.1.0"

from .grid import (  # noqa: F401
    DomainMask,
    Grid,
    NodeSet,
    ProductField,
    RadiusField,
    ScalarField,
    boundary_distance,
    distance_to_set,
    interval_grid,
    interval_mask,
    square_grid,
    square_mask,
    sublevel_mask,
)
from .maxop import (  # noqa: F401
    MaximalResult,
    directional_maximal,
    hardy_littlewood,
    local_maximal,
    local_maximal_fast,
    truncated_maximal,
)
from .seminorm import (  # noqa: F401
    DifferenceField,
    SeminormParams,
    classical_seminorm,
    difference_field,
    hardy_functional,
    lp_norm,
    weighted_seminorm,
)
from .weights import ApEstimate, Weight, ap_constant_estimate, reflect, tail_integrability  # noqa: F401
from .capacity import (  # noqa: F401
    CapacityProblem,
    CapacitySolution,
    capacity_energy,
    capacity_subadditivity_check,
    neighbourhood_family,
    solve_capacity,
)
from .geometry import (  # noqa: F401
    DyadicGapSet,
    PorosityReport,
    box_dimension_estimate,
    build_cantor,
    build_gap_set,
    covering_number,
    porosity_check,
)
