"""Frames, wavelet systems and their spectral models at desk scale."""
from .errors import ConfigError, DegenerateSupportError, InvalidArgument, NumericWarning
from .signals import (
    CompactPiecewisePoly,
    apply_dyadic,
    bspline,
    fourier_eval,
    gram_matrix,
    haar_wavelet,
    indicator,
    inner_product,
    linear_combination,
    refinement_combination,
    translate,
    zero,
)
from .trig import TrigPolynomial
from .fiber import bracket, bracket_exact, fiber_vector, support_sigma, tail_bound, uniform_grid
from .shift_invariant import (
    PeriodicSymbol,
    extract_mask,
    membership_v0,
    mra_density_check,
    project_v0,
    refinability_check,
)
from .extension import (
    MaskFamily,
    ThetaSymbol,
    dual_oep_verify,
    dual_pair_identity_check,
    oep_verify,
    uep_matrix,
    uep_verify,
)
from .dilation import (
    OnbConfig,
    alpha,
    alpha_tensor,
    fiber_frame_bounds,
    fiber_matrix,
    g_transform,
    tight_residual,
)
from .frames import (
    WaveletSystemSpec,
    analysis,
    frame_apply,
    frame_bounds,
    quasi_affine,
    random_probes,
    reconstruct,
    synthesis,
)

__version__ = "0.1.0"
