"""Samplers for the nine null scenarios of the type I error study, each with
zero population rank correlation by construction, on reproducible
counter-based random streams.

A draw is a pure function of (spec, n, seed, stream): the stream is a Philox
generator keyed by the (seed, stream) pair, and the order in which each
sampler consumes random variates is part of the frozen contract.
"""

import math
from dataclasses import dataclass

import numpy as np

from spearperm.core import InvalidInputError, PairedSample, spearman_r

__all__ = [
    "RngState",
    "ScenarioSpec",
    "CANONICAL_SCENARIO_IDS",
    "scenario_from_id",
    "sample_scenario",
    "null_spearman_check",
]

_MAX_U64 = 2**64 - 1

# component correlations of the canonical two-normal mixtures
MIXTURE_RHO_GRID = (0.1, 0.3, 0.6, 0.9)


@dataclass(frozen=True)
class RngState:
    """(seed, stream) pair identifying one reproducible random stream."""

    seed: int
    stream: int = 0

    def __post_init__(self):
        for name, value in (("seed", self.seed), ("stream", self.stream)):
            if not 0 <= int(value) <= _MAX_U64:
                raise InvalidInputError(f"{name} must be an unsigned 64-bit integer")

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class ScenarioSpec:
    """One null scenario. kind is one of mvn, exp, circular, t4.1, mvt5,
    mvnmix2, mvnmix4; mvnmix2 carries the component correlation rho."""

    kind: str
    rho: float | None = None

    def __post_init__(self):
        if self.kind not in _SAMPLERS:
            raise InvalidInputError(f"unknown scenario kind {self.kind!r}")
        if self.kind == "mvnmix2":
            if self.rho is None or not -1.0 < self.rho < 1.0:
                raise InvalidInputError(
                    "mvnmix2 requires a component correlation rho in (-1, 1)"
                )
        elif self.rho is not None:
            raise InvalidInputError(f"scenario {self.kind!r} takes no rho parameter")

    @property
    def scenario_id(self) -> str:
        if self.kind == "mvnmix2":
            return f"mvnmix-{self.rho:g}"
        return self.kind

    @property
    def stream_code(self) -> int:
        """Frozen 16-bit code used to derive the scenario's random streams.

        Canonical scenarios use their registry position; a non-canonical
        mixture correlation maps to 0x4000 + round(rho * 10000).
        """
        if self.kind != "mvnmix2":
            return _BASE_CODES[self.kind]
        milli = round(self.rho * 10000)
        grid = {round(g * 10000): i for i, g in enumerate(MIXTURE_RHO_GRID)}
        if milli in grid:
            return _BASE_CODES["mvnmix2"] + grid[milli]
        return 0x4000 + milli


def _sample_mvn(gen, n):
    xy = gen.standard_normal((n, 2))
    return xy[:, 0], xy[:, 1]


def _sample_exp_radial(gen, n):
    # scaled radial law: radius ~ Exp(1), direction uniform on the circle,
    # x stretched by sqrt(2)
    radius = gen.exponential(1.0, n)
    theta = gen.uniform(0.0, 2.0 * math.pi, n)
    return radius * math.sqrt(2.0) * np.cos(theta), radius * np.sin(theta)


def _sample_circular(gen, n):
    theta = gen.uniform(0.0, 2.0 * math.pi, n)
    return np.cos(theta), np.sin(theta)


def _sample_t_sum_diff(gen, n):
    # x = w + z, y = w - z with w, z iid Student t, 4.1 degrees of freedom:
    # uncorrelated but strongly dependent margins
    w = gen.standard_t(4.1, n)
    z = gen.standard_t(4.1, n)
    return w + z, w - z


def _sample_mvt5(gen, n):
    # bivariate t, 5 degrees of freedom, identity scale: one chi-square
    # divisor shared by both coordinates makes them dependent
    z = gen.standard_normal((n, 2))
    q = gen.chisquare(5.0, n)
    scale = np.sqrt(q / 5.0)
    return z[:, 0] / scale, z[:, 1] / scale


def _sample_mvnmix2(gen, n, rho):
    # equal mixture of bivariate normals with component correlations +-rho
    e = gen.standard_normal((n, 2))
    flip = gen.random(n) < 0.5
    rho_i = np.where(flip, rho, -rho)
    x = e[:, 0]
    y = rho_i * e[:, 0] + math.sqrt(1.0 - rho * rho) * e[:, 1]
    return x, y


_MIX4_MEANS = np.array([[5.0, 5.0], [5.0, -5.0], [-5.0, 5.0], [-5.0, -5.0]])


def _sample_mvnmix4(gen, n):
    component = gen.integers(0, 4, n)
    xy = _MIX4_MEANS[component] + gen.standard_normal((n, 2))
    return xy[:, 0], xy[:, 1]


_SAMPLERS = {
    "mvn": _sample_mvn,
    "exp": _sample_exp_radial,
    "circular": _sample_circular,
    "t4.1": _sample_t_sum_diff,
    "mvt5": _sample_mvt5,
    "mvnmix2": _sample_mvnmix2,
    "mvnmix4": _sample_mvnmix4,
}

_BASE_CODES = {
    "mvn": 0,
    "exp": 1,
    "circular": 2,
    "t4.1": 3,
    "mvt5": 4,
    "mvnmix2": 5,  # canonical rho grid occupies 5..8
    "mvnmix4": 9,
}

CANONICAL_SCENARIO_IDS = (
    "mvn",
    "exp",
    "circular",
    "t4.1",
    "mvt5",
    "mvnmix-0.1",
    "mvnmix-0.3",
    "mvnmix-0.6",
    "mvnmix-0.9",
    "mvnmix4",
)


def scenario_from_id(scenario_id: str) -> ScenarioSpec:
    """Resolve a stable string identifier ("mvn", "mvnmix-0.9", ...) to a spec."""
    if scenario_id.startswith("mvnmix-"):
        try:
            rho = float(scenario_id[len("mvnmix-"):])
        except ValueError:
            raise InvalidInputError(f"bad mixture id {scenario_id!r}")
        return ScenarioSpec(kind="mvnmix2", rho=rho)
    if scenario_id in _SAMPLERS and scenario_id != "mvnmix2":
        return ScenarioSpec(kind=scenario_id)
    raise InvalidInputError(
        f"unknown scenario id {scenario_id!r}; expected one of "
        + ", ".join(CANONICAL_SCENARIO_IDS)
    )


def sample_scenario(spec: ScenarioSpec, n: int, rng: RngState) -> PairedSample:
    """n i.i.d. draws from the scenario's joint law, deterministic in rng."""
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    gen = rng.generator()
    if spec.kind == "mvnmix2":
        x, y = _sample_mvnmix2(gen, n, spec.rho)
    else:
        x, y = _SAMPLERS[spec.kind](gen, n)
    return PairedSample(x, y)


def null_spearman_check(spec: ScenarioSpec, draws: int, rng: RngState) -> float:
    """Sample rank correlation over one large draw; a test-suite aid for
    confirming each scenario's population rank correlation is zero."""
    if draws < 10**5:
        raise InvalidInputError("null check needs at least 1e5 draws")
    return spearman_r(sample_scenario(spec, draws, rng))
