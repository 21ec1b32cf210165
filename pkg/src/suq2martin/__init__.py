"""Random walks, Green functions and Martin kernels on the dual of quantum SU(2).

Modules
-------
fusion
    Labels (twice-spins), q-numbers, quantum dimensions and the algebra of
    q-tracial weight functionals.
central
    The induced Markov chain on spin labels: kernels, Green functions with
    certified tails, renewal quantities, balayage and the 0-2 law.
blocks
    Representation matrices, Podles generators, adjoint action, Haar pairing
    and Clebsch-Gordan isometries.
martin
    The Markov operator on block elements, block potentials, the Martin
    kernel and the boundary polynomials.
"""

from .blocks import (
    BlockElement,
    CGIsometry,
    adjoint_action,
    cg_isometry,
    cg_residuals,
    chi0_identity_residual,
    chi_elements,
    coproduct_block,
    haar_pairing,
    podles_residuals,
    rep_matrices,
    spin1_adjoint_residual,
)
from .central import (
    CentralElement,
    GreenTable,
    RenewalData,
    asymptotic_report,
    balayage,
    convolution_powers,
    decay_rate,
    green_central,
    martin_central,
    path_probability,
    renewal_sequence,
    solve_delta,
    transition_kernel,
    zero_two_estimate,
    zero_two_sequence,
)
from .exceptions import (
    InputError,
    NumericalError,
    ResourceError,
    Suq2Error,
    TransienceError,
    UndercertifiedError,
)
from .fusion import (
    DeformationParams,
    WeightFunctional,
    check_dual,
    fuse_labels,
    fusion_coeff,
    is_generating,
    q_binomial,
    q_number,
    quantum_dim,
    weight_product,
)
from .martin import (
    DeviationReport,
    PolynomialQ,
    boundary_deviation,
    boundary_polynomial,
    boundary_values,
    duality_residual,
    fourier_alpha_power,
    green_block,
    harmonic_residual,
    markov_step,
    martin_apply,
    martin_gap,
    tilde_polynomial,
)

__version__ = "0.1.0"

__all__ = [
    "adjoint_action",
    "asymptotic_report",
    "balayage",
    "BlockElement",
    "boundary_deviation",
    "boundary_polynomial",
    "boundary_values",
    "CentralElement",
    "cg_isometry",
    "cg_residuals",
    "CGIsometry",
    "check_dual",
    "chi0_identity_residual",
    "chi_elements",
    "convolution_powers",
    "coproduct_block",
    "decay_rate",
    "DeformationParams",
    "DeviationReport",
    "duality_residual",
    "fourier_alpha_power",
    "fuse_labels",
    "fusion_coeff",
    "green_block",
    "green_central",
    "GreenTable",
    "haar_pairing",
    "harmonic_residual",
    "InputError",
    "is_generating",
    "markov_step",
    "martin_apply",
    "martin_central",
    "martin_gap",
    "NumericalError",
    "path_probability",
    "podles_residuals",
    "PolynomialQ",
    "q_binomial",
    "q_number",
    "quantum_dim",
    "renewal_sequence",
    "RenewalData",
    "rep_matrices",
    "ResourceError",
    "solve_delta",
    "spin1_adjoint_residual",
    "Suq2Error",
    "tilde_polynomial",
    "TransienceError",
    "transition_kernel",
    "UndercertifiedError",
    "weight_product",
    "WeightFunctional",
    "zero_two_estimate",
    "zero_two_sequence",
]
