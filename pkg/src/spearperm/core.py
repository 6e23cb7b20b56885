"""Deterministic numeric kernels: tie-averaged ranking, correlation
estimators, central product moments, the studentized rank statistic, and the
expected rank correlation under a bivariate normal population.

All functions here are pure; none touch random state.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpearpermError",
    "InvalidInputError",
    "DegenerateSampleError",
    "ParseError",
    "InsufficientDataError",
    "PairedSample",
    "RankVector",
    "MomentEstimate",
    "average_ranks",
    "rank_pair",
    "pearson_r",
    "spearman_r",
    "central_moment",
    "studentizing_scale",
    "studentized_spearman",
    "expected_spearman_bvn",
]


class SpearpermError(Exception):
    """Base class for all library errors."""


class InvalidInputError(SpearpermError):
    """Arguments violate a precondition (lengths, ranges, flags)."""


class DegenerateSampleError(SpearpermError):
    """A margin is constant, so every correlation quantity is undefined."""


class ParseError(SpearpermError):
    """A CSV cell could not be parsed; carries the 1-based file row."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class InsufficientDataError(SpearpermError):
    """Fewer than two complete pairs remain after filtering."""


def _as_finite_vector(values, name="values"):
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be one-dimensional")
    if arr.size < 2:
        raise InvalidInputError(f"{name} needs at least 2 entries, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class PairedSample:
    """n paired observations (x_i, y_i); the unit every test consumes.

    Construction enforces equal lengths, n >= 2, and finite entries.
    """

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = _as_finite_vector(self.xs, "xs")
        ys = _as_finite_vector(self.ys, "ys")
        if xs.size != ys.size:
            raise InvalidInputError(
                f"xs and ys lengths differ: {xs.size} != {ys.size}"
            )
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def n(self) -> int:
        return self.xs.size


@dataclass(frozen=True)
class RankVector:
    """Average ranks of one margin; entries lie in [1, n] and sum to n(n+1)/2."""

    ranks: np.ndarray

    @property
    def n(self) -> int:
        return self.ranks.size


@dataclass(frozen=True)
class MomentEstimate:
    """Central product moment estimate with n in the divisor."""

    p: int
    q: int
    value: float


def average_ranks(values) -> RankVector:
    """Rank a vector 1..n, assigning tied values the mean of the positions
    they occupy.

    (10, 20, 30) -> (1, 2, 3); (1, 2, 2, 3) -> (1, 2.5, 2.5, 4).
    """
    arr = _as_finite_vector(values)
    n = arr.size
    order = np.argsort(arr, kind="stable")
    sorted_vals = arr[order]
    block_start = np.empty(n, dtype=bool)
    block_start[0] = True
    block_start[1:] = sorted_vals[1:] != sorted_vals[:-1]
    starts = np.flatnonzero(block_start)
    counts = np.diff(np.append(starts, n))
    # a block of c ties starting at 0-based position s covers ranks s+1..s+c
    block_rank = starts + (counts + 1) / 2.0
    ranks = np.empty(n, dtype=np.float64)
    ranks[order] = np.repeat(block_rank, counts)
    return RankVector(ranks)


def rank_pair(sample: PairedSample) -> PairedSample:
    """Replace both margins with their average ranks."""
    return PairedSample(
        average_ranks(sample.xs).ranks, average_ranks(sample.ys).ranks
    )


def _clamp_unit(r: float) -> float:
    # rounding can push |r| past 1 by ~1e-16; the contract is [-1, 1]
    return min(1.0, max(-1.0, r))


def pearson_r(sample: PairedSample) -> float:
    """Sample product-moment correlation coefficient.

    Raises DegenerateSampleError when either margin has zero variance.
    """
    xd = sample.xs - sample.xs.mean()
    yd = sample.ys - sample.ys.mean()
    sxx = float(xd @ xd)
    syy = float(yd @ yd)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateSampleError("constant margin: correlation undefined")
    denom_sq = sxx * syy
    if 0.0 < denom_sq < math.inf:
        denom = math.sqrt(denom_sq)
    else:
        # the product under/overflowed: split the square roots instead
        denom = math.sqrt(sxx) * math.sqrt(syy)
    return _clamp_unit(float(xd @ yd) / denom)


def spearman_r(sample: PairedSample) -> float:
    """Rank correlation coefficient: pearson_r on the average ranks.

    Always computed on ranks; the classic 1 - 6*sum(d^2)/(n(n^2-1)) shortcut
    is invalid under ties and is used only as a test oracle.
    """
    return pearson_r(rank_pair(sample))


def central_moment(sample: PairedSample, p: int, q: int) -> MomentEstimate:
    """(1/n) * sum (x_i - xbar)^p (y_i - ybar)^q, divisor n (not n-1)."""
    if p < 0 or q < 0:
        raise InvalidInputError("moment orders must be nonnegative")
    xd = sample.xs - sample.xs.mean()
    yd = sample.ys - sample.ys.mean()
    value = float(np.mean(xd**p * yd**q))
    return MomentEstimate(p=p, q=q, value=value)


def studentizing_scale(sample: PairedSample) -> float:
    """Scale estimate sqrt(m22 / (m20 * m02)) built from fourth-order central
    moments; divides the correlation to make its null distribution pivotal.

    Scale-invariant in each margin. Raises DegenerateSampleError when a
    marginal variance is zero.
    """
    m20 = central_moment(sample, 2, 0).value
    m02 = central_moment(sample, 0, 2).value
    if m20 == 0.0 or m02 == 0.0:
        raise DegenerateSampleError("constant margin: scale undefined")
    m22 = central_moment(sample, 2, 2).value
    return math.sqrt(m22 / (m20 * m02))


def studentized_spearman(sample: PairedSample) -> float:
    """Rank correlation divided by the studentizing scale of the rank pair.

    The scale is computed on the rank vectors, not the raw data. Under heavy
    ties the scale can be exactly zero, in which case the correlation is
    provably zero too and the statistic is defined as 0.
    """
    ranked = rank_pair(sample)
    rs = pearson_r(ranked)
    tau = studentizing_scale(ranked)
    if tau == 0.0:
        return 0.0
    return rs / tau


def expected_spearman_bvn(rho: float, n: int) -> float:
    """Expected rank correlation for n pairs from a bivariate normal
    population with product-moment correlation rho:

        (6 / (pi * (n + 1))) * (asin(rho) + (n - 2) * asin(rho / 2))
    """
    if not -1.0 <= rho <= 1.0:
        raise InvalidInputError(f"rho must lie in [-1, 1], got {rho}")
    if n < 2:
        raise InvalidInputError(f"n must be at least 2, got {n}")
    return (6.0 / (math.pi * (n + 1))) * (
        math.asin(rho) + (n - 2) * math.asin(rho / 2.0)
    )
