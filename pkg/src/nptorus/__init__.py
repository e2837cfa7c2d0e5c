"""Neumann-Poincare operator on a torus: toroidal-harmonic matrix blocks,
their spectra, and a brute-force boundary-integral oracle."""

from .ring import (
    ConvergenceError,
    DomainError,
    OverflowGuard,
    RingFunctionValue,
    gamma_half_ratio,
    ring_deriv,
    ring_P,
    ring_Q,
    wronskian_residual,
)
from .geometry import (
    ModeIndex,
    SingularLocus,
    SurfaceFrame,
    ToroidalPoint,
    TorusShape,
    cartesian_to_toroidal,
    density_basis,
    harmonic_eval,
    surface_frame,
    toroidal_to_cartesian,
)
from .assembly import (
    NPBlock,
    StructuralMatrices,
    assemble_block,
    assemble_product_form,
    consistency_delta,
    diag_D,
    offdiag_R,
    kstar_closed_form,
    structural_matrices,
)
from .spectrum import (
    SpectrumReport,
    balance_block,
    convergence_study,
    eigen_spectrum,
    sign_census,
)
from .oracle import (
    ExtrapolationDiverged,
    QuadratureGrid,
    TooClose,
    np_apply,
    oracle_matrix,
    project_basis,
    single_layer_eval,
    two_sided_normal_derivative,
)

__version__ = "0.1.0"
