"""Extremal instances for probing tester limits, plus Poissonized sampling."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dist_core import (ExplicitDistribution, Sampler, SampleSet, draw_sample_set,
                        exact_l1_distance, exact_l2_distance, make_sampler)


@dataclass(frozen=True)
class InstancePair:
    p: ExplicitDistribution
    q: ExplicitDistribution
    exact_l1: float = field(init=False)
    exact_l2: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "exact_l1", exact_l1_distance(self.p, self.q))
        object.__setattr__(self, "exact_l2", exact_l2_distance(self.p, self.q))


def _cube_root(n: int) -> int | None:
    c = round(n ** (1.0 / 3.0))
    for r in (c - 1, c, c + 1):
        if r > 0 and r**3 == n:
            return r
    return None


def heavy_light_pair(n: int) -> InstancePair:
    """Pair with identical heavy parts and disjoint light parts, l1 distance 1.

    Elements ``1..n^{2/3}`` carry ``1/(2 n^{2/3})`` under both; ``p`` puts
    ``2/n`` on ``(n/2, 3n/4]`` and ``q`` puts ``2/n`` on ``(3n/4, n]``.
    ``n`` must be a perfect cube divisible by 4 (8, 64, 216, 512, ...).
    """
    c = _cube_root(n)
    if c is None or n % 4 or n < 8:
        raise ValueError(f"n={n} must be a perfect cube divisible by 4")
    heavy = c * c
    p = np.zeros(n)
    q = np.zeros(n)
    p[:heavy] = q[:heavy] = 1.0 / (2 * heavy)
    p[n // 2:3 * n // 4] = 2.0 / n
    q[3 * n // 4:] = 2.0 / n
    return InstancePair(ExplicitDistribution(p), ExplicitDistribution(q))


def biased_coin_pair(epsilon: float) -> InstancePair:
    """Fair coin against a coin with bias ``eps/sqrt(2)``; l2 distance exactly ``eps``."""
    if not 0 < epsilon < 1 / math.sqrt(2):
        raise ValueError(f"epsilon must lie in (0, 1/sqrt(2)), got {epsilon}")
    shift = epsilon / math.sqrt(2)
    return InstancePair(ExplicitDistribution([0.5, 0.5]),
                        ExplicitDistribution([0.5 - shift, 0.5 + shift]))


def poissonized_sample(s: Sampler, lam: float, rng: np.random.Generator) -> SampleSet:
    """Draw ``Poisson(lam)`` samples, making per-element counts independent Poissons."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    k = int(rng.poisson(lam))
    return draw_sample_set(s, k, rng)


def case_samples(pair: InstancePair, case: int, m: int,
                 rng: np.random.Generator) -> tuple[SampleSet, SampleSet]:
    """Case 1: two sample sets from ``p``. Case 2: one from ``p``, one from ``q``."""
    if case not in (1, 2):
        raise ValueError("case must be 1 or 2")
    first = draw_sample_set(make_sampler(pair.p), m, rng)
    second = draw_sample_set(make_sampler(pair.p if case == 1 else pair.q), m, rng)
    return first, second


def disjoint_halves(n: int) -> InstancePair:
    """Uniform on the first half against uniform on the second half (even n)."""
    if n < 2 or n % 2:
        raise ValueError("n must be even and at least 2")
    p = np.zeros(n)
    q = np.zeros(n)
    p[:n // 2] = q[n // 2:] = 2.0 / n
    return InstancePair(ExplicitDistribution(p), ExplicitDistribution(q))


def shifted_mass(p: ExplicitDistribution, l1: float) -> ExplicitDistribution:
    """Move ``l1/2`` mass from the heaviest element onto the lightest other one.

    The result is at l1 distance exactly ``l1`` from ``p`` (up to rounding).
    """
    probs = np.array(p.probs)
    if probs.size < 2:
        raise ValueError("need at least two elements")
    hi = int(np.argmax(probs))
    rest = probs.copy()
    rest[hi] = np.inf
    lo = int(np.argmin(rest))
    if probs[hi] < l1 / 2:
        raise ValueError("not enough mass on the heaviest element")
    probs[hi] -= l1 / 2
    probs[lo] += l1 / 2
    return ExplicitDistribution(probs)
