"""Jump-counting statistics of Markovian open quantum systems.

Tilted Lindblad generators and their dominant spectra (SCGFs), generalized
Doob transforms, jump-permutation symmetries with the induced fluctuation
relation, and a reproducible quantum-jump Monte Carlo sampler.
"""

from .errors import (
    ConsistencyError,
    DegenerateDominantEigenvalueError,
    DimensionMismatchError,
    EigenSolveError,
    GridPairingError,
    ModelValidationError,
    NonRealDominantEigenvalueError,
    NormUnderflowError,
    NotPositiveDefiniteError,
    OutOfValidityDomainError,
    QjfError,
    SamplerError,
    ZeroTraceRightError,
)
from .grids import GridSpec, centered_grid
from .lindblad import (
    CountingObservable,
    LindbladModel,
    TiltedGenerator,
    apply_dual,
    apply_generator,
    dual_identity_residual,
    effective_hamiltonian,
    lindblad_generator,
    tilted_generator,
)
from .spectral import (
    ScanPoint,
    SpectralData,
    cumulants,
    scgf,
    scgf_scan,
    solve_scgf,
    theta_gradient,
)
from .symmetry import (
    DynamicsSymmetryReport,
    PermutationSymmetry,
    check_dynamics_symmetry,
    check_tilted_symmetry,
    check_weight_compatibility,
    transform_trajectory,
    weight_compatibility_residual,
)
from .doob import (
    DoobModel,
    FrPair,
    FrReport,
    SimilarityReport,
    TypicalityReport,
    compare_doob_typicality,
    doob_stationary_state,
    doob_transform,
    tilted_doob,
    verify_fluctuation_relation,
    verify_similarity,
)
from .trajectories import (
    JumpSampler,
    SampleStats,
    ScgfEstimate,
    Trajectory,
    estimate_scgf,
    sample_ensemble,
    sample_trajectory,
    trajectory_probability_density,
)
from .models import (
    ModelBundle,
    build_example,
    oracle_theta,
    single_qubit,
    single_qubit_theta,
    spin_chain,
    spin_chain_theta,
    two_qubit,
    two_qubit_theta,
)
from .io import load_model, save_model

__version__ = "0.1.0"
