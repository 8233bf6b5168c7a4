"""Fractional compound Poisson processes: pmfs, moments, samplers and equation checks."""

from .compound import (
    ProcessSpec,
    compound_moments,
    compound_pmf,
    compound_pmf_table,
    overdispersion_curve,
    space_pmf_exppoly,
)
from .errors import NumericalError, OutOfRangeError, QuadratureError, SeriesConvergenceError
from .fracderiv import (
    ExpPoly,
    GridFunction,
    TailFunction,
    caputo_l1,
    caputo_l1_all,
    caputo_l1_iterated,
    classical_derivative,
    rl_right_quad,
    rl_right_values,
)
from .fracpoisson import (
    Regime,
    frac_difference,
    overdispersion_factor,
    pmf_space_frac,
    pmf_space_frac_table,
    pmf_time_frac,
    pmf_time_frac_table,
    tf_moments,
)
from .jumplaws import (
    JumpLaw,
    UnitJump,
    Variant,
    conv_pmf,
    conv_pmf_bruteforce,
    conv_table,
    negative_binomial_law,
    pig_lambda,
    pig_law,
    polya_aeppli_law,
    ztnb_pgf,
    ztnb_pmf,
)
from .specfun import (
    SeriesControl,
    falling_factorial,
    gen_binom,
    ml_general,
    rising_factorial,
    stirling1_unsigned,
)
from .subord import (
    CompoundPoissonExp,
    GammaProc,
    InverseGaussian,
    InverseStable,
    RandomStream,
    StableSubordinator,
    kappa_s,
    mixing_subordinator,
    sample_inv_stable,
    sample_stable,
    sample_subordinator,
    simulate_count,
    simulate_counts,
)
from .verify import (
    ResidualReport,
    SystemId,
    TransformReport,
    kolmogorov_residuals,
    pa_recursion_residuals,
    space_classical_residuals,
    spacefrac_op_residuals,
    transform_checks,
    two_param_residuals,
)

__version__ = "0.1.0"
