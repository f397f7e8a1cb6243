"""Collision counts, the r - s closeness statistic and sample fingerprints."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dist_core import SampleSet


def self_collisions(f: SampleSet) -> int:
    """Number of index pairs ``i < j`` whose draws coincide.

    Computed as the sum of ``C(count, 2)`` over elements, O(n) rather than
    O(m^2).
    """
    c = f.counts
    return int((c * (c - 1) // 2).sum())


def cross_collisions(fp: SampleSet, fq: SampleSet) -> int:
    """Number of pairs (i, j) with the i-th draw of ``fp`` equal to the j-th of ``fq``."""
    if fp.n != fq.n:
        raise ValueError(f"domain mismatch: n={fp.n} vs n={fq.n}")
    return int(np.dot(fp.counts, fq.counts))


@dataclass(frozen=True)
class CollisionCounts:
    r_p: int
    r_q: int
    s_pq: int
    m: int

    def __post_init__(self):
        pairs = self.m * (self.m - 1) // 2
        if not (0 <= self.r_p <= pairs and 0 <= self.r_q <= pairs):
            raise ValueError("self-collision count out of range")
        if not 0 <= self.s_pq <= self.m * self.m:
            raise ValueError("cross-collision count out of range")

    @classmethod
    def from_samples(cls, fp: SampleSet, fq: SampleSet, qp: SampleSet, qq: SampleSet) -> CollisionCounts:
        m = fp.m
        if not fq.m == qp.m == qq.m == m:
            raise ValueError("all four sample sets must have the same size")
        return cls(self_collisions(fp), self_collisions(fq), cross_collisions(qp, qq), m)


def rs_statistic(c: CollisionCounts) -> float:
    """``r - s`` with ``r = 2m/(m-1) (r_p + r_q)`` and ``s = 2 s_pq``.

    Its expectation is ``m^2 ||p - q||_2^2``.
    """
    if c.m < 2:
        raise ValueError("need m >= 2")
    r = 2.0 * c.m / (c.m - 1) * (c.r_p + c.r_q)
    s = 2.0 * c.s_pq
    return r - s


def variance_bound(m: int, b: float, c: float) -> float:
    """Upper bound ``c (m^3 b^2 + m^2 b)`` on Var(r - s); ``b`` is the larger sup-norm."""
    return c * (m**3 * b**2 + m**2 * b)


@dataclass(frozen=True)
class Fingerprint:
    """Counts ``C_ij`` of elements seen exactly i times in one sample and j in the other.

    ``C_00`` is never stored: unobserved elements cannot be counted.
    """

    entries: dict[tuple[int, int], int]
    s: int = field(default=-1)

    def __post_init__(self):
        clean = {}
        for (i, j), k in self.entries.items():
            i, j, k = int(i), int(j), int(k)
            if i < 0 or j < 0 or k < 0:
                raise ValueError("fingerprint entries must be nonnegative")
            if (i, j) == (0, 0):
                raise ValueError("C_00 is not part of a fingerprint")
            if k:
                clean[(i, j)] = k
        object.__setattr__(self, "entries", clean)
        max_mult = max((max(i, j) for i, j in clean), default=0)
        if self.s < 0:
            object.__setattr__(self, "s", max_mult)
        elif self.s < max_mult:
            raise ValueError(f"s={self.s} below the largest multiplicity {max_mult}")

    def __getitem__(self, ij: tuple[int, int]) -> int:
        return self.entries.get(ij, 0)

    @property
    def size1(self) -> int:
        return sum(i * k for (i, _), k in self.entries.items())

    @property
    def size2(self) -> int:
        return sum(j * k for (_, j), k in self.entries.items())

    @property
    def distinct(self) -> int:
        return sum(self.entries.values())

    def to_dict(self) -> dict:
        return {"s": self.s, "entries": [[i, j, k] for (i, j), k in sorted(self.entries.items())]}

    @classmethod
    def from_dict(cls, d: dict) -> Fingerprint:
        return cls({(i, j): k for i, j, k in d["entries"]}, s=int(d["s"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> Fingerprint:
        return cls.from_dict(json.loads(text))


def fingerprint(s1: SampleSet, s2: SampleSet) -> Fingerprint:
    if s1.n != s2.n:
        raise ValueError(f"domain mismatch: n={s1.n} vs n={s2.n}")
    seen = (s1.counts > 0) | (s2.counts > 0)
    pairs = np.stack([s1.counts[seen], s2.counts[seen]], axis=1)
    if pairs.size == 0:
        return Fingerprint({})
    keys, k = np.unique(pairs, axis=0, return_counts=True)
    return Fingerprint({(int(i), int(j)): int(c) for (i, j), c in zip(keys, k)})


def canonical_key(ij: tuple[int, int]) -> tuple[int, int]:
    """Total order on fingerprint cells: by i + j, then by i descending.

    This lists cells as C10, C01, C11, C02, C21, ...
    """
    i, j = ij
    return (i + j, -i)


def standard_form(f: Fingerprint, n: int | None = None) -> tuple[SampleSet, SampleSet]:
    """Rebuild the canonical sample pair whose fingerprint is ``f``.

    Walk the cells in canonical order; each of the ``C_ij`` elements of a
    cell takes the next unused label and gets i copies in the first sample
    and j in the second.
    """
    needed = f.distinct
    if n is None:
        n = max(needed, 1)
    if needed > n:
        raise ValueError(f"fingerprint needs {needed} distinct elements but the domain has {n}")
    c1 = np.zeros(n, dtype=np.int64)
    c2 = np.zeros(n, dtype=np.int64)
    e = 0
    for ij in sorted(f.entries, key=canonical_key):
        k = f.entries[ij]
        c1[e:e + k] = ij[0]
        c2[e:e + k] = ij[1]
        e += k
    return SampleSet(c1), SampleSet(c2)
