"""Haar measure on congruence quotients: sampling, sections, independence, FPP."""

from .fpp import (
    FppReport,
    fpp_curve_exact,
    fpp_exact,
    fpp_monte_carlo,
    fpp_of_elements,
    fpp_wreath_curve,
    fpp_wreath_recursion,
)
from .independence import IndependenceReport, independence_chi_square, independence_exact
from .measure import (
    CousinPreconditionError,
    KernelCheck,
    check_section_measure_preserving,
    cone_measure,
    cousin_precondition,
    kernel_size_check,
    non_cousin_sets,
    sample_batch,
    sample_uniform,
    section_pushforward,
)
from .rng import BLOCK_SIZE, TEST_VECTOR, TEST_VECTOR_HASH, SeededRng, verify_test_vector
from .stats import ALPHA, CONFIDENCE, Estimate, pearson_chi_square, proportion
