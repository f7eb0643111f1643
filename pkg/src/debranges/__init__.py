"""Numerical laboratory for sampled de Branges spaces.

Builds discrete measures, canonical products, partial-fraction corrections and
the auxiliary entire function S; assembles the sampled interpolation space and
the modified space whose point evaluation at one real point is discontinuous;
and verifies every identity involved at controlled tolerances.
"""

__version__ = "0.1.0"

from .measures import (
    CoefficientVector,
    DiscreteMeasure,
    DomainReport,
    MeasureLaw,
    conjugate,
    divide_at,
    ell2_norm,
    make_measure,
    multiplication_domain_check,
)
from .weierstrass import (
    WeierstrassProduct,
    build_product,
    derivative_at_zero,
    eval_product,
)
from .mittag_leffler import MittagLefflerSeries, build_series, eval_series, residue_check
from .s_function import SFunction, TargetSet, build_s, choose_targets, eval_s, s_prime_at
from .space import (
    KernelVector,
    SampledSpace,
    SpaceElement,
    build_space,
    element,
    eval_bound,
    eval_x,
    h1_divide,
    h3_star,
    kernel_at,
)
from .counterexample import (
    CounterexampleConfig,
    TildeElement,
    WitnessRow,
    WitnessTable,
    default_config,
    discontinuity_witness,
    eval_g,
    eval_h,
    h1_check_tilde,
    h3_check_tilde,
    space_for,
    validate_config,
)

__all__ = [name for name in dir() if not name.startswith("_")]
