"""Six tests of zero rank correlation for paired samples, with a uniform
result contract, plus an exact enumeration oracle for small n.

Sampled permutation tests shuffle the y-rank vector directly (the tie
pattern of a margin is fixed, so shuffling ranks and re-ranking shuffled
values are equivalent) and are fully deterministic given (sample, B, seed).

p-value conventions:
  greater    p = (1/B) * #{k : stat_k > stat_obs}     (strict)
  less       p = (1/B) * #{k : stat_k < stat_obs}     (strict)
  two-sided  p = (1/B) * #{k : |stat_k| >= |stat_obs|}
The optional add-one correction replaces count/B with (count+1)/(B+1).
"""

import math
from dataclasses import dataclass
from enum import Enum
from itertools import permutations as _iter_permutations

import numpy as np
# ufuncs instead of scipy.stats wrappers: these run once per Monte Carlo
# replicate, where the wrapper overhead dominates the arithmetic
from scipy.special import ndtr, ndtri, stdtr

from spearperm import _backend
from spearperm.core import (
    DegenerateSampleError,
    InvalidInputError,
    PairedSample,
    _clamp_unit,
    rank_pair,
)

__all__ = [
    "Alternative",
    "Method",
    "TestResult",
    "PermutationNull",
    "t_test",
    "fisher_z_test",
    "fisher_yates_test",
    "asymptotic_normal_test",
    "naive_permutation_test",
    "studentized_permutation_test",
    "exact_permutation_pvalue",
    "permutation_null",
    "run_test",
]

MAX_SEED = 2**64 - 1

# second Philox key word for permutation streams, distinct from scenario
# sampling streams; part of the frozen reproducibility contract
_PERM_KEY_TAG = 0x9E3779B97F4A7C15

MAX_EXACT_N = 8


class Alternative(Enum):
    GREATER = "greater"
    LESS = "less"
    TWO_SIDED = "two-sided"


class Method(Enum):
    T = "t"
    FISHER_Z = "fisher-z"
    FISHER_YATES = "fisher-yates"
    ASYMP_NORM = "asymp-norm"
    PERMUTE = "permute"
    STU_PERMUTE = "stu-permute"


PERMUTATION_METHODS = frozenset({Method.PERMUTE, Method.STU_PERMUTE})


def _as_alternative(alt) -> Alternative:
    if isinstance(alt, Alternative):
        return alt
    try:
        return Alternative(alt)
    except ValueError:
        valid = ", ".join(a.value for a in Alternative)
        raise InvalidInputError(f"unknown alternative {alt!r}; expected one of {valid}")


def _as_method(method) -> Method:
    if isinstance(method, Method):
        return method
    try:
        return Method(method)
    except ValueError:
        valid = ", ".join(m.value for m in Method)
        raise InvalidInputError(f"unknown method {method!r}; expected one of {valid}")


@dataclass(frozen=True)
class TestResult:
    """Uniform result of any of the six tests.

    estimate is always the sample rank correlation; statistic is the
    method's own test statistic. permutations and seed are present exactly
    for the sampled permutation tests.
    """

    method: Method
    statistic: float
    p_value: float
    estimate: float
    n: int
    alternative: Alternative
    permutations: int | None = None
    seed: int | None = None
    degenerate: bool = False

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise InvalidInputError(f"p_value outside [0, 1]: {self.p_value}")
        is_perm = self.method in PERMUTATION_METHODS
        if is_perm != (self.permutations is not None):
            raise InvalidInputError(
                "permutations must be present exactly for permutation tests"
            )
        if is_perm != (self.seed is not None):
            raise InvalidInputError("seed must be present exactly for permutation tests")


@dataclass(frozen=True)
class PermutationNull:
    """Sampled permutation distribution of a statistic plus the observed value."""

    values: np.ndarray
    observed: float

    def __post_init__(self):
        if self.values.size < 1:
            raise InvalidInputError("permutation null needs at least one value")


def _check_seed(seed):
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise InvalidInputError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def _check_permutation_count(b):
    b = int(b)
    if b < 1:
        raise InvalidInputError(f"permutation count must be >= 1, got {b}")
    return b


def permutation_bits(seed, num, n):
    """The (num, n-1) uint64 shuffle words for permutations 0..num-1 of an
    n-vector, drawn from a counter-based stream keyed by (seed, tag).

    Row k is a pure function of (seed, k, n): the words for permutation k
    occupy counter positions k*(n-1)..(k+1)*(n-1)-1 irrespective of num, so
    evaluations may be split or reordered freely. Frozen contract.
    """
    key = np.array([seed, _PERM_KEY_TAG], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    return gen.integers(0, 2**64, size=(num, n - 1), dtype=np.uint64)


def _centered_ranks(sample):
    """Centered rank deviations of both margins; errors on constant margins."""
    ranked = rank_pair(sample)
    adev = ranked.xs - ranked.xs.mean()
    bdev = ranked.ys - ranked.ys.mean()
    if float(adev @ adev) == 0.0 or float(bdev @ bdev) == 0.0:
        raise DegenerateSampleError("constant margin: rank tests undefined")
    return adev, bdev


def _count_exceedances(stats, observed, alt):
    if alt is Alternative.GREATER:
        return int(np.count_nonzero(stats > observed))
    if alt is Alternative.LESS:
        return int(np.count_nonzero(stats < observed))
    return int(np.count_nonzero(np.abs(stats) >= abs(observed)))


def _t_tail_p(statistic, df, alt):
    """Student t tail probability; the t distribution is symmetric, so the
    upper tail is the lower tail of the negated statistic."""
    if alt is Alternative.GREATER:
        return float(stdtr(df, -statistic))
    if alt is Alternative.LESS:
        return float(stdtr(df, statistic))
    return float(min(1.0, 2.0 * stdtr(df, -abs(statistic))))


def _norm_tail_p(statistic, alt):
    if alt is Alternative.GREATER:
        return float(ndtr(-statistic))
    if alt is Alternative.LESS:
        return float(ndtr(statistic))
    return float(min(1.0, 2.0 * ndtr(-abs(statistic))))


def _degenerate_result(method, sign_source, estimate, n, alt):
    """Result for a correlation of +-1, where t-style statistics blow up."""
    statistic = math.inf if sign_source > 0 else -math.inf
    if alt is Alternative.GREATER:
        p = 0.0 if sign_source > 0 else 1.0
    elif alt is Alternative.LESS:
        p = 1.0 if sign_source > 0 else 0.0
    else:
        p = 0.0
    return TestResult(
        method=method,
        statistic=statistic,
        p_value=p,
        estimate=estimate,
        n=n,
        alternative=alt,
        degenerate=True,
    )


def _t_style_result(method, r_for_stat, rs_estimate, n, alt):
    """Shared tail logic for the two tests that refer r-like values to a
    Student t distribution with n-2 degrees of freedom."""
    if abs(r_for_stat) >= 1.0:
        return _degenerate_result(method, r_for_stat, rs_estimate, n, alt)
    statistic = r_for_stat * math.sqrt((n - 2) / (1.0 - r_for_stat**2))
    p = _t_tail_p(statistic, n - 2, alt)
    return TestResult(
        method=method,
        statistic=statistic,
        p_value=p,
        estimate=rs_estimate,
        n=n,
        alternative=alt,
    )


def t_test(sample: PairedSample, alt="greater") -> TestResult:
    """Rank correlation referred to a Student t distribution with n-2
    degrees of freedom via t = r * sqrt((n-2)/(1-r^2)).

    Valid only under joint normality assumptions the ranks cannot satisfy;
    kept for comparison. Requires n >= 3.
    """
    alt = _as_alternative(alt)
    if sample.n < 3:
        raise InvalidInputError("t test needs n >= 3")
    adev, bdev = _centered_ranks(sample)
    rs = _clamp_unit(_backend.observed_stat(adev, bdev, False))
    return _t_style_result(Method.T, rs, rs, sample.n, alt)


def fisher_z_test(sample: PairedSample, alt="greater") -> TestResult:
    """Variance-stabilized test: z = atanh(r) referred to N(0, 1.06/(n-3)).

    The reported statistic is z standardized by sqrt(1.06/(n-3)).
    Requires n >= 4.
    """
    alt = _as_alternative(alt)
    if sample.n < 4:
        raise InvalidInputError("z transform test needs n >= 4")
    adev, bdev = _centered_ranks(sample)
    rs = _clamp_unit(_backend.observed_stat(adev, bdev, False))
    if abs(rs) >= 1.0:
        return _degenerate_result(Method.FISHER_Z, rs, rs, sample.n, alt)
    statistic = math.atanh(rs) / math.sqrt(1.06 / (sample.n - 3))
    p = _norm_tail_p(statistic, alt)
    return TestResult(
        method=Method.FISHER_Z,
        statistic=statistic,
        p_value=p,
        estimate=rs,
        n=sample.n,
        alternative=alt,
    )


def fisher_yates_test(sample: PairedSample, alt="greater") -> TestResult:
    """Normal-scores test: both margins are mapped to normal quantiles
    Phi^{-1}(rank/(n+1)), then the score correlation is referred to a
    Student t with n-2 degrees of freedom. Requires n >= 3.
    """
    alt = _as_alternative(alt)
    if sample.n < 3:
        raise InvalidInputError("normal-scores test needs n >= 3")
    adev, bdev = _centered_ranks(sample)
    rs = _clamp_unit(_backend.observed_stat(adev, bdev, False))
    ranked = rank_pair(sample)
    n = sample.n
    xs_scores = ndtri(ranked.xs / (n + 1))
    ys_scores = ndtri(ranked.ys / (n + 1))
    xd = xs_scores - xs_scores.mean()
    yd = ys_scores - ys_scores.mean()
    r_score = _clamp_unit(
        float(xd @ yd) / math.sqrt(float(xd @ xd) * float(yd @ yd))
    )
    return _t_style_result(Method.FISHER_YATES, r_score, rs, n, alt)


def _delta_method_variance(adev, bdev, r):
    """Plug-in estimate of the large-sample variance of the sample
    correlation coefficient, from the multivariate delta method with the
    observed correlation substituted for its population value. Nonnegative
    up to rounding; exactly zero at r = +-1."""
    n = adev.size
    m20 = float(adev @ adev) / n
    m02 = float(bdev @ bdev) / n
    a2 = adev * adev
    b2 = bdev * bdev
    m22 = float(a2 @ b2) / n
    m40 = float(a2 @ a2) / n
    m04 = float(b2 @ b2) / n
    m31 = float((a2 * adev) @ bdev) / n
    m13 = float(adev @ (b2 * bdev)) / n
    return (
        m22 / (m20 * m02)
        + r * r / 4.0 * (m40 / m20**2 + m04 / m02**2 + 2.0 * m22 / (m20 * m02))
        - r * (m31 / (m20**1.5 * m02**0.5) + m13 / (m20**0.5 * m02**1.5))
    )


def asymptotic_normal_test(sample: PairedSample, alt="greater") -> TestResult:
    """Large-sample test: the rank correlation standardized by its
    delta-method variance estimate and referred to the standard normal.
    Requires n >= 4.

    Asymptotically valid whenever fourth moments exist, but known to
    inflate the type I error for n below about 50.
    """
    alt = _as_alternative(alt)
    if sample.n < 4:
        raise InvalidInputError("asymptotic normal test needs n >= 4")
    adev, bdev = _centered_ranks(sample)
    rs = _clamp_unit(_backend.observed_stat(adev, bdev, False))
    if abs(rs) >= 1.0:
        # the variance estimate vanishes at r = +-1 (up to rounding)
        return _degenerate_result(Method.ASYMP_NORM, rs, rs, sample.n, alt)
    variance = _delta_method_variance(adev, bdev, rs)
    if variance <= 0.0:
        if rs == 0.0:
            statistic = 0.0
        else:
            return _degenerate_result(Method.ASYMP_NORM, rs, rs, sample.n, alt)
    else:
        statistic = math.sqrt(sample.n) * rs / math.sqrt(variance)
    p = _norm_tail_p(statistic, alt)
    return TestResult(
        method=Method.ASYMP_NORM,
        statistic=statistic,
        p_value=p,
        estimate=rs,
        n=sample.n,
        alternative=alt,
    )


def _sampled_permutation_test(sample, alt, b, seed, studentized, add_one_correction):
    alt = _as_alternative(alt)
    b = _check_permutation_count(b)
    seed = _check_seed(seed)
    adev, bdev = _centered_ranks(sample)
    observed = _backend.observed_stat(adev, bdev, studentized)
    bits = permutation_bits(seed, b, sample.n)
    stats = _backend.permute_stats(adev, bdev, bits, studentized)
    count = _count_exceedances(stats, observed, alt)
    if add_one_correction:
        p = (count + 1) / (b + 1)
    else:
        p = count / b
    rs = _clamp_unit(_backend.observed_stat(adev, bdev, False))
    return TestResult(
        method=Method.STU_PERMUTE if studentized else Method.PERMUTE,
        statistic=observed if studentized else rs,
        p_value=p,
        estimate=rs,
        n=sample.n,
        alternative=alt,
        permutations=b,
        seed=seed,
    )


def naive_permutation_test(
    sample: PairedSample, alt="greater", b=1000, seed=0, add_one_correction=False
) -> TestResult:
    """Permutation test of the plain rank correlation: y-ranks are shuffled
    b times and the observed value is compared against the re-pairings.

    Exact for independence under exchangeability, but not asymptotically
    valid for zero rank correlation under dependence. Requires n >= 2.
    """
    return _sampled_permutation_test(sample, alt, b, seed, False, add_one_correction)


def studentized_permutation_test(
    sample: PairedSample, alt="greater", b=1000, seed=0, add_one_correction=False
) -> TestResult:
    """Permutation test of the studentized rank correlation.

    Ranks are computed once; every re-pairing recomputes both the rank
    correlation and its studentizing scale, so the reference distribution
    remains valid when the margins are dependent but uncorrelated.
    Requires n >= 3 so the scale has variation to work with.
    """
    if sample.n < 3:
        raise InvalidInputError("studentized permutation test needs n >= 3")
    return _sampled_permutation_test(sample, alt, b, seed, True, add_one_correction)


def permutation_null(sample: PairedSample, statistic="stu", b=1000, seed=0) -> PermutationNull:
    """Sampled permutation distribution of the chosen statistic
    ("plain" or "stu") together with the observed value."""
    studentized = _statistic_flag(statistic)
    b = _check_permutation_count(b)
    seed = _check_seed(seed)
    adev, bdev = _centered_ranks(sample)
    bits = permutation_bits(seed, b, sample.n)
    values = _backend.permute_stats(adev, bdev, bits, studentized)
    observed = _backend.observed_stat(adev, bdev, studentized)
    return PermutationNull(values=values, observed=observed)


def _statistic_flag(statistic):
    if statistic in ("plain", "stu"):
        return statistic == "stu"
    raise InvalidInputError(f"statistic must be 'plain' or 'stu', got {statistic!r}")


def exact_permutation_pvalue(sample: PairedSample, statistic="stu", alt="greater") -> float:
    """Exact p-value over all n! re-pairings, with the same exceedance
    conventions as the sampled tests. Enumeration oracle; refuses n > 8.
    """
    alt = _as_alternative(alt)
    studentized = _statistic_flag(statistic)
    n = sample.n
    if n > MAX_EXACT_N:
        raise InvalidInputError(
            f"exact enumeration is limited to n <= {MAX_EXACT_N}; use a sampled test"
        )
    adev, bdev = _centered_ranks(sample)
    perms = np.array(list(_iter_permutations(range(n))), dtype=np.intp)
    stats = _backend.stats_for_perms(adev, bdev, perms, studentized)
    observed = _backend.observed_stat(adev, bdev, studentized)
    return _count_exceedances(stats, observed, alt) / len(perms)


def run_test(
    method, sample: PairedSample, alt="greater", b=1000, seed=0, add_one_correction=False
) -> TestResult:
    """Dispatch a test by method id; permutation arguments are ignored by
    the parametric tests."""
    method = _as_method(method)
    if method is Method.T:
        return t_test(sample, alt)
    if method is Method.FISHER_Z:
        return fisher_z_test(sample, alt)
    if method is Method.FISHER_YATES:
        return fisher_yates_test(sample, alt)
    if method is Method.ASYMP_NORM:
        return asymptotic_normal_test(sample, alt)
    if method is Method.PERMUTE:
        return naive_permutation_test(sample, alt, b, seed, add_one_correction)
    return studentized_permutation_test(sample, alt, b, seed, add_one_correction)
