"""Rational matrix functions through state-space realizations.

Realizations ``R(z) = D + C (zI - A)^{-1} B`` are multiplied, reduced and
evaluated; their autocorrelation coefficients feed the Ruelle transfer
operator; rational inner functions produce wavelet filters whose infinite
products are evaluated with certified tail bounds.
"""

from .infinite_product import (
    L2Certificate,
    NotNormalizedError,
    ProductResult,
    R1ExceedsOne,
    ToeplitzSection,
    cascade_constant,
    father_hat,
    l2_norm_estimate,
    partial_product_l2,
    product_along_points,
    toeplitz_norm_estimate,
    toeplitz_section,
    toeplitz_symbol_eval,
)
from .linalg_kernel import (
    DimensionError,
    SingularMatrixError,
    char_poly,
    inverse,
    operator_norm,
    solve,
    spectral_radius,
)
from .markov import (
    CoefficientSequence,
    autocorrelation_closed,
    autocorrelation_convolution,
    ch_recursion,
    decay_check,
    fit_decay_rate,
    markov_parameters,
    recursion_residual,
)
from .realization import (
    MultiVarRealization,
    NotContractiveError,
    PoleError,
    Realization,
    constant,
    eval_multivar,
    evaluate,
    from_alternative,
    minimize,
    multivar_product,
    observability_gramian,
    product,
    product_chain,
    similarity,
    substitute_power,
    y_vector,
)
from .ruelle import (
    SlantedOperator,
    WeightedSequence,
    aliased_coefficients,
    apply,
    apply_pointwise,
    continuity_certificate,
    r1,
    r1_deviation,
    slanted_matrix,
    trace_coefficients,
    trace_realization,
    trace_spectral,
    weighted_norm,
)
from .wavelet import (
    BlaschkeFactor,
    RationalInner,
    WaveletFilter,
    assemble_inner,
    build_filter,
    filter_realization,
    lowpass_symbol,
    preset_daubechies4,
    preset_haar,
    random_rational_inner,
)

__version__ = "0.1.0"
