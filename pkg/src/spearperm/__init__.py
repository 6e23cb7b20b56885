"""Tests of zero Spearman rank correlation for paired samples, centered on a
studentized permutation test, plus a reproducible Monte Carlo harness for
studying type I error control under dependent-but-uncorrelated nulls.
"""

from spearperm.core import (
    DegenerateSampleError,
    InsufficientDataError,
    InvalidInputError,
    MomentEstimate,
    PairedSample,
    ParseError,
    RankVector,
    SpearpermError,
    average_ranks,
    central_moment,
    expected_spearman_bvn,
    pearson_r,
    rank_pair,
    spearman_r,
    studentized_spearman,
    studentizing_scale,
)
from spearperm.hypotests import (
    Alternative,
    Method,
    PermutationNull,
    TestResult,
    asymptotic_normal_test,
    exact_permutation_pvalue,
    fisher_yates_test,
    fisher_z_test,
    naive_permutation_test,
    permutation_null,
    run_test,
    studentized_permutation_test,
    t_test,
)
from spearperm.scenarios import (
    CANONICAL_SCENARIO_IDS,
    RngState,
    ScenarioSpec,
    null_spearman_check,
    sample_scenario,
    scenario_from_id,
)
from spearperm.harness import (
    GridConfig,
    PRESETS,
    SimulationSummary,
    derive_stream,
    derive_test_seed,
    estimate_type1_error,
    plot_series,
    run_grid,
    summaries_to_csv,
    summaries_to_json,
)
from spearperm._backend import BACKEND_NAME, available_backends

__version__ = "0.1.0"
