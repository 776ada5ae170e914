"""Stochastic logistic map toolkit: reproducible simulation of the
logistic map with a randomly drawn growth rate, Monte-Carlo
approximation of its invariant distribution, and numerical comparison
of stochastic and deterministic long-term averages."""

from .analytic import (
    LAMBDA_C2,
    LAMBDA_C2_OMEGA,
    LAMBDA_C3,
    LAMBDA_C4,
    LAMBDA_C4_END,
    LAMBDA_VERTEX,
    Period2Pair,
    Regime,
    SupportIntervals,
    WindowCase,
    band_geometry,
    check_ordering,
    classify_regime,
    comparison_functions,
    convexity_on_interval,
    detect_period,
    fixed_point,
    fixed_points,
    h_function_roots,
    h_second_derivative,
    period2_average,
    period2_points,
    periodic_orbit,
    stability_preconditions,
    support_intervals,
)
from .experiments import (
    BifurcationDataset,
    ComparisonReport,
    FlipFlopReport,
    LemmaSuiteReport,
    deterministic_bifurcation,
    distribution_evolution,
    ergodic_consistency,
    flipflop_scan,
    lemma_suite,
    mean_comparison,
    stochastic_bifurcation,
)
from .maps import (
    ParameterDistribution,
    SamplePath,
    generate_path,
    iterate_deterministic,
    logistic_step,
    sample_parameter,
    stochastic_step,
    stream_rng,
)
from .measure import (
    DEFAULT_SEED,
    Ensemble,
    Histogram,
    Moments,
    MonteCarloConfig,
    PeakSplit,
    moments,
    occupation_fraction,
    pf_iterate,
    pf_step,
    right_derivative_profile,
    split_peaks,
    stationary_stats,
    time_average,
    uniform_ensemble,
    variance_of_right_peak,
)

__version__ = "0.1.0"
