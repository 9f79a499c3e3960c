"""Noise-operator functionals of Boolean functions and the dictatorship conjectures."""

from .boolean_fn import (
    BooleanFunction,
    Spectrum,
    complement,
    dictatorship,
    from_truth_table,
    is_balanced,
    majority,
    parse_truth_table,
    wht,
)
from .laguerre import ExpSum, RangeExceededError, ZeroReport, build_expsum, find_zeros, sign_changes
from .noise import NoiseField, apply_noise, apply_noise_direct, apply_noise_spectral, complement_field
from .norms import CurveSpec, binary_entropy, deriv_at_one, g, mutual_information, n_alpha, n_alpha_sym
from .verifier import canonical_form, check_function, enumerate_balanced, verify_all

__version__ = "0.1.0"
