"""Concrete group models and structural checks."""

from .checks import (
    check_branching_witness,
    check_fractal,
    check_level_transitive,
    check_pattern_closure,
    check_self_similar,
    check_super_strongly_fractal,
    enumerate_quotient,
    restriction_kernel_size,
)
from .models import (
    GRIGORCHUK,
    KINDS,
    Affine,
    AbelianLevel,
    ChartModel,
    CyclicWreath,
    FullWreath,
    GroupModel,
    PatternModel,
    PatternSpec,
    QuotientTooLarge,
    RecursionModel,
    WreathRecursionSpec,
    closure,
    generated_subgroup,
    make_model,
    model_from_config,
    parse_group_tag,
)
