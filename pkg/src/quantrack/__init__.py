"""Tracking periodic references under uniform output quantization.

Transfer-function algebra, state-space realization, a uniform quantizer,
reference recoverability tests, positive-real loop design and a closed-loop
simulator with artificial quantization of the reference, plus Lissajous scan
planning on top.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ConstraintViolation,
    ImproperTransferFunction,
    ImproperUnfixable,
    NoConvergence,
    NoCrossings,
    NonAdjacentRegions,
    NumericalDivergence,
    PoleAtFrequency,
    UnstableCancellation,
    ZeroPolynomial,
)
from .lissajous import (
    LissajousSpec,
    axis_references,
    frequency_ratio,
    measure_scan_gap,
    plan_frequencies,
    required_N,
    scan_resolution,
)
from .pr_design import (
    PRComposition,
    check_positive_real,
    check_theorem1,
    compose,
    synthesize_controller,
)
from .quantization import UniformQuantizer, crossing_value, quantize, region_index
from .realization import StateSpaceModel, output, realize, rk4_step
from .reference import (
    ReferenceSpec,
    SineTerm,
    basis_row,
    eval_reference,
    find_crossings,
    recover_rho,
    reference_is_recoverable,
    rho,
)
from .sim_loop import (
    DualAxisTrace,
    LoopConfig,
    SimTrace,
    apply_step_change,
    simulate_axis,
    simulate_dual,
)
from .tf_algebra import (
    Polynomial,
    RationalTransferFunction,
    poly_mul,
    poly_roots,
    reduce,
    tf,
    tf_add,
    tf_eval,
    tf_mul,
)
