"""Explicit distributions, black-box samplers and exact oracles.

Elements are 0-indexed everywhere in the Python API. The JSON file format
and human-facing messages use 1-indexed labels.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from os import PathLike
from typing import Protocol, runtime_checkable

import numpy as np

SUM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ExplicitDistribution:
    """Dense probability vector over ``n`` elements."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=np.float64).ravel()
        if probs.size == 0:
            raise ValueError("distribution needs at least one element")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise ValueError("probabilities must be finite and nonnegative")
        total = probs.sum()
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)

    @property
    def n(self) -> int:
        return self.probs.size

    @classmethod
    def from_weights(cls, weights) -> ExplicitDistribution:
        """Normalize nonnegative weights into a distribution."""
        w = np.asarray(weights, dtype=np.float64)
        if np.any(w < 0) or w.sum() <= 0:
            raise ValueError("weights must be nonnegative with positive total")
        return cls(w / w.sum())

    @classmethod
    def uniform(cls, n: int) -> ExplicitDistribution:
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def point_mass(cls, n: int, i: int) -> ExplicitDistribution:
        p = np.zeros(n)
        p[i] = 1.0
        return cls(p)

    def to_dict(self) -> dict:
        return {"n": self.n, "probs": self.probs.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> ExplicitDistribution:
        probs = d["probs"]
        if int(d["n"]) != len(probs):
            raise ValueError(f"n={d['n']} but {len(probs)} probabilities given")
        return cls(np.asarray(probs, dtype=np.float64))

    def save(self, path: str | PathLike) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path: str | PathLike) -> ExplicitDistribution:
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def __eq__(self, other):
        if not isinstance(other, ExplicitDistribution):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.probs, other.probs))

    def __hash__(self):
        return hash(self.probs.tobytes())


@runtime_checkable
class Sampler(Protocol):
    """Black-box access to a distribution over ``n`` elements.

    ``draw(rng)`` returns one element, ``draw(rng, size)`` an int64 array.
    Every draw consumes randomness only from the generator passed in.
    """

    n: int

    def draw(self, rng: np.random.Generator, size: int | None = None): ...


def inverse_cdf_table(probs: np.ndarray) -> np.ndarray:
    """Cumulative sums with the tail pinned to exactly 1.

    Entries at and after the last positive probability are set to 1.0 so a
    variate in ``[0, 1)`` can never land on a trailing zero-mass element.
    """
    cdf = np.cumsum(probs, dtype=np.float64)
    cdf /= cdf[-1]
    last = np.flatnonzero(probs > 0)[-1]
    cdf[last:] = 1.0
    return cdf


@dataclass(frozen=True, eq=False)
class DistributionSampler:
    """Inverse-CDF sampler over an explicit distribution.

    A variate exactly equal to a cumulative boundary maps to the
    higher-indexed element (``searchsorted`` with ``side='right'``).
    """

    dist: ExplicitDistribution
    cdf: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "cdf", inverse_cdf_table(self.dist.probs))

    @property
    def n(self) -> int:
        return self.dist.n

    def draw(self, rng: np.random.Generator, size: int | None = None):
        u = rng.random(size)
        idx = np.searchsorted(self.cdf, u, side="right")
        if size is None:
            return int(idx)
        return idx.astype(np.int64, copy=False)


def make_sampler(p: ExplicitDistribution) -> DistributionSampler:
    return DistributionSampler(p)


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Multiset of draws kept as per-element counts."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64).ravel()
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return self.counts.size

    @property
    def m(self) -> int:
        return int(self.counts.sum())

    @classmethod
    def from_draws(cls, draws, n: int) -> SampleSet:
        draws = np.asarray(draws, dtype=np.int64)
        if draws.size and (draws.min() < 0 or draws.max() >= n):
            raise ValueError("draw outside the domain")
        return cls(np.bincount(draws, minlength=n))

    @classmethod
    def from_mapping(cls, mapping: dict[int, int], n: int) -> SampleSet:
        counts = np.zeros(n, dtype=np.int64)
        for element, c in mapping.items():
            counts[element] = c
        return cls(counts)

    def as_mapping(self) -> dict[int, int]:
        nz = np.flatnonzero(self.counts)
        return {int(i): int(self.counts[i]) for i in nz}

    def __eq__(self, other):
        if not isinstance(other, SampleSet):
            return NotImplemented
        return bool(np.array_equal(self.counts, other.counts))

    def __hash__(self):
        return hash(self.counts.tobytes())


def draw_sample_set(s: Sampler, m: int, rng: np.random.Generator) -> SampleSet:
    if m < 0:
        raise ValueError("m must be nonnegative")
    return SampleSet.from_draws(s.draw(rng, m), s.n)


def _check_same_domain(p: ExplicitDistribution, q: ExplicitDistribution) -> None:
    if p.n != q.n:
        raise ValueError(f"domain mismatch: n={p.n} vs n={q.n}")


def exact_l1_distance(p: ExplicitDistribution, q: ExplicitDistribution) -> float:
    _check_same_domain(p, q)
    return float(np.abs(p.probs - q.probs).sum())


def exact_l2_distance(p: ExplicitDistribution, q: ExplicitDistribution) -> float:
    _check_same_domain(p, q)
    return float(np.linalg.norm(p.probs - q.probs))


def exact_linf(p: ExplicitDistribution) -> float:
    return float(p.probs.max())


def exact_collision_probability(p: ExplicitDistribution, q: ExplicitDistribution) -> float:
    """Probability that one draw from each distribution coincides, ``p . q``."""
    _check_same_domain(p, q)
    return float(np.dot(p.probs, q.probs))


def empirical_distribution(s: SampleSet) -> np.ndarray:
    if s.m == 0:
        raise ValueError("empty sample set")
    return s.counts / s.m
