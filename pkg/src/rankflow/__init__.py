"""rankflow: simulate networked coupled dynamical systems and verify the
invariants of their state-matrix flows.

Scalar-coupled systems (consensus, coordination, distance formations)
evolve the stacked state as dX/dt = X W(t, X).T, which keeps both the
rank and the column span of X fixed over any finite horizon.  Matrix
couplings preserve the rank exactly when the blocks share one drift
matrix up to scalar-identity shifts and all cross couplings are scalar
multiples of the identity; the span may then still rotate, which the
Grassmann drift series measures.  On symmetric square states the
matching structure additionally freezes the eigenvalue signature.

The package provides the simulator, the invariance diagnostics, the
structural condition checkers and a scenario-driven CLI with built-in
demos.
"""

from .errors import (
    AsymmetricMatrixError,
    DegenerateInputError,
    DimensionMismatchError,
    KindMismatchError,
    NumericalFailureError,
    RankflowError,
    RankNotConstantError,
    ScenarioError,
)
from .linalg import (
    RANK_REL_TOL,
    Signature,
    SubspaceBasis,
    kronecker_with_identity,
    matrix_exponential,
    numerical_rank,
    orthonormal_basis,
    principal_angles,
    projector_distance,
    signature,
    svd,
    sym_eigen,
)
from .system import (
    CoupledSystem,
    CouplingKind,
    CouplingSpec,
    assemble_block_matrix,
    assemble_scalar_W,
    matrix_constant_spec,
    rhs_matrix_form,
    rhs_vector_form,
    scalar_constant_spec,
    stack_state,
    unstack_state,
)
from .integrate import (
    IntegratorConfig,
    Trajectory,
    integrate,
    lti_exact_solution,
    oracle_error,
    rk4_step,
)
from .diagnostics import (
    SUBSPACE_THRESHOLD,
    GrassmannDriftSeries,
    InvarianceReport,
    check_collinearity_class,
    check_rank_invariance,
    check_row_subspace_preservation,
    check_signature_preservation,
    check_subspace_preservation,
    grassmann_drift,
    rank_trajectory,
    signature_trajectory,
)
from .structure import (
    STRUCTURE_TOL,
    BlockSample,
    StructureVerdict,
    blocks_from_trajectory,
    build_from_decomposition,
    check_rank_preserving_structure,
    check_signature_preserving_structure,
    coupling_blocks,
    nearest_scalar_multiple,
)
from .models import (
    FormationTarget,
    Graph,
    affine_coordination,
    collinear_general,
    consensus,
    distance_formation,
    linear_sync_type1,
    linear_sync_type2,
    matrix_weighted_consensus,
)
from .scenario import Scenario, load_scenario, random_rank_state, scenario_from_dict
from .runner import RunReport, run

__version__ = "0.1.0"

__all__ = [
    "AsymmetricMatrixError", "DegenerateInputError", "DimensionMismatchError",
    "KindMismatchError", "NumericalFailureError", "RankflowError",
    "RankNotConstantError", "ScenarioError",
    "RANK_REL_TOL", "Signature", "SubspaceBasis", "kronecker_with_identity",
    "matrix_exponential", "numerical_rank", "orthonormal_basis",
    "principal_angles", "projector_distance", "signature", "svd", "sym_eigen",
    "CoupledSystem", "CouplingKind", "CouplingSpec", "assemble_block_matrix",
    "assemble_scalar_W", "matrix_constant_spec", "rhs_matrix_form",
    "rhs_vector_form", "scalar_constant_spec", "stack_state", "unstack_state",
    "IntegratorConfig", "Trajectory", "integrate", "lti_exact_solution",
    "oracle_error", "rk4_step",
    "SUBSPACE_THRESHOLD", "GrassmannDriftSeries", "InvarianceReport",
    "check_collinearity_class", "check_rank_invariance",
    "check_row_subspace_preservation", "check_signature_preservation",
    "check_subspace_preservation", "grassmann_drift", "rank_trajectory",
    "signature_trajectory",
    "STRUCTURE_TOL", "BlockSample", "StructureVerdict", "blocks_from_trajectory",
    "build_from_decomposition", "check_rank_preserving_structure",
    "check_signature_preserving_structure", "coupling_blocks",
    "nearest_scalar_multiple",
    "FormationTarget", "Graph", "affine_coordination", "collinear_general",
    "consensus", "distance_formation", "linear_sync_type1", "linear_sync_type2",
    "matrix_weighted_consensus",
    "Scenario", "load_scenario", "random_rank_state", "scenario_from_dict",
    "RunReport", "run",
    "__version__",
]
