"""Sparse Markov chains, random-walk samplers and mixing testers."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from os import PathLike
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .closeness_tests import Verdict, l1_distance_test
from .dist_core import SUM_TOL, Sampler

ClosenessTester = Callable[..., Verdict]


class MarkovChain:
    """Row-stochastic transition matrix stored row by row.

    Each row keeps strictly increasing targets, their probabilities and
    the cumulative sums used by :func:`next_node`.
    """

    def __init__(self, rows):
        indptr = [0]
        indices = []
        data = []
        for u, row in enumerate(rows):
            row = sorted((int(v), float(p)) for v, p in row if p != 0)
            targets = [v for v, _ in row]
            if any(a >= b for a, b in zip(targets, targets[1:])):
                raise ValueError(f"row {u + 1} repeats a target")
            if not row:
                raise ValueError(f"row {u + 1} is empty")
            indices.extend(targets)
            data.extend(p for _, p in row)
            indptr.append(len(indices))
        self.n = len(indptr) - 1
        if self.n == 0:
            raise ValueError("chain needs at least one state")
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.data = np.asarray(data, dtype=np.float64)
        if self.indices.min() < 0 or self.indices.max() >= self.n:
            raise ValueError("transition target outside the state space")
        if np.any(self.data < 0):
            raise ValueError("negative transition probability")
        sums = np.add.reduceat(self.data, self.indptr[:-1])
        bad = np.flatnonzero(np.abs(sums - 1.0) > SUM_TOL)
        if bad.size:
            raise ValueError(f"row {bad[0] + 1} sums to {sums[bad[0]]!r}, not 1")
        cums = np.empty_like(self.data)
        for u in range(self.n):
            lo, hi = self.indptr[u], self.indptr[u + 1]
            c = np.cumsum(self.data[lo:hi])
            cums[lo:hi] = c / c[-1]
            cums[hi - 1] = 1.0
        self.cumsums = cums
        # row u's cumsums shifted into [u, u+1] so one searchsorted serves a batch
        self._offset_cums = cums + np.repeat(np.arange(self.n, dtype=np.float64), np.diff(self.indptr))
        for a in (self.indptr, self.indices, self.data, self.cumsums, self._offset_cums):
            a.flags.writeable = False

    @classmethod
    def from_dense(cls, matrix) -> MarkovChain:
        matrix = np.asarray(matrix, dtype=np.float64)
        return cls([[(v, p) for v, p in enumerate(r) if p] for r in matrix])

    def row(self, u: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.indptr[u], self.indptr[u + 1]
        return self.indices[lo:hi], self.data[lo:hi]

    @property
    def rows(self) -> list[list[tuple[int, float]]]:
        return [list(zip(*(a.tolist() for a in self.row(u)))) for u in range(self.n)]

    @property
    def max_degree(self) -> int:
        return int(np.diff(self.indptr).max())

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    @cached_property
    def matrix(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.data, self.indices, self.indptr), shape=(self.n, self.n))

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    @cached_property
    def _alias(self) -> tuple[np.ndarray, np.ndarray]:
        prob = np.empty_like(self.data)
        alias = np.empty_like(self.indices)
        for u in range(self.n):
            lo, hi = self.indptr[u], self.indptr[u + 1]
            pr, al = alias_table(self.data[lo:hi])
            prob[lo:hi] = pr
            alias[lo:hi] = al
        return prob, alias

    def step(self, states, rng: np.random.Generator, method: str = "binary") -> np.ndarray:
        """Advance every walker in ``states`` by one transition."""
        states = np.asarray(states, dtype=np.int64)
        if method == "binary":
            u = rng.random(states.shape)
            pos = np.searchsorted(self._offset_cums, states + u, side="right")
            # guard against float rounding at a row's upper edge
            pos = np.minimum(pos, self.indptr[states + 1] - 1)
            return self.indices[pos]
        if method == "alias":
            prob, alias = self._alias
            deg = np.diff(self.indptr)[states]
            col = (rng.random(states.shape) * deg).astype(np.int64)
            col = np.minimum(col, deg - 1)
            pos = self.indptr[states] + col
            keep = rng.random(states.shape) < prob[pos]
            return np.where(keep, self.indices[pos], self.indices[self.indptr[states] + alias[pos]])
        raise ValueError(f"unknown next_node method {method!r}")

    def to_dict(self) -> dict:
        return {"n": self.n, "rows": [[[v + 1, p] for v, p in r] for r in self.rows]}

    @classmethod
    def from_dict(cls, d: dict) -> MarkovChain:
        rows = d["rows"]
        if int(d["n"]) != len(rows):
            raise ValueError(f"n={d['n']} but {len(rows)} rows given")
        return cls([[(int(v) - 1, float(p)) for v, p in r] for r in rows])

    def save(self, path: str | PathLike) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path: str | PathLike) -> MarkovChain:
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def __eq__(self, other):
        if not isinstance(other, MarkovChain):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices) and np.array_equal(self.data, other.data))

    def __repr__(self):
        return f"MarkovChain(n={self.n}, nnz={self.nnz})"


def alias_table(probs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vose alias table: ``(keep probability, alias column)`` per column."""
    k = len(probs)
    scaled = np.asarray(probs, dtype=np.float64) * k / np.sum(probs)
    prob = np.ones(k)
    alias = np.arange(k)
    small = [i for i in range(k) if scaled[i] < 1.0]
    large = [i for i in range(k) if scaled[i] >= 1.0]
    while small and large:
        s, g = small.pop(), large.pop()
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = scaled[g] + scaled[s] - 1.0
        (small if scaled[g] < 1.0 else large).append(g)
    # leftovers are 1 up to rounding
    return prob, alias


def next_node(M: MarkovChain, u: int, rng: np.random.Generator, method: str = "binary") -> int:
    """Successor of ``u`` drawn with probability ``M[u, v]``.

    ``binary`` does a binary search of row u's cumulative sums (a variate on
    a boundary goes to the higher entry); ``alias`` uses a Vose table.
    """
    if not 0 <= u < M.n:
        raise ValueError(f"state {u} outside [0, {M.n})")
    lo, hi = M.indptr[u], M.indptr[u + 1]
    if lo == hi:
        raise ValueError(f"row {u + 1} is empty")
    if method == "binary":
        k = int(np.searchsorted(M.cumsums[lo:hi], rng.random(), side="right"))
        return int(M.indices[lo + min(k, hi - lo - 1)])
    return int(M.step(np.array([u]), rng, method)[0])


def walk(M: MarkovChain, u: int, t: int, rng: np.random.Generator, method: str = "binary") -> int:
    if t < 0:
        raise ValueError("t must be nonnegative")
    for _ in range(t):
        u = next_node(M, u, rng, method)
    return u


def walk_many(M: MarkovChain, starts, t: int, rng: np.random.Generator, method: str = "binary") -> np.ndarray:
    states = np.asarray(starts, dtype=np.int64)
    for _ in range(t):
        states = M.step(states, rng, method)
    return states


@dataclass(frozen=True, eq=False)
class WalkSampler:
    """Endpoint of a ``t``-step walk from ``start``; the distribution ``e_u M^t``."""

    chain: MarkovChain
    start: int
    t: int
    method: str = "binary"

    @property
    def n(self) -> int:
        return self.chain.n

    def draw(self, rng: np.random.Generator, size: int | None = None):
        if size is None:
            return walk(self.chain, self.start, self.t, rng, self.method)
        return walk_many(self.chain, np.full(size, self.start), self.t, rng, self.method)


@dataclass(frozen=True, eq=False)
class AverageWalkSampler:
    """Uniform start state followed by ``t`` steps; the average t-step distribution."""

    chain: MarkovChain
    t: int
    method: str = "binary"

    @property
    def n(self) -> int:
        return self.chain.n

    def draw(self, rng: np.random.Generator, size: int | None = None):
        if size is None:
            return walk(self.chain, int(rng.integers(self.n)), self.t, rng, self.method)
        return walk_many(self.chain, rng.integers(self.n, size=size), self.t, rng, self.method)


def average_t_step_sampler(M: MarkovChain, t: int, method: str = "binary") -> AverageWalkSampler:
    if t < 0:
        raise ValueError("t must be nonnegative")
    return AverageWalkSampler(M, t, method)


def _propagate(M: MarkovChain, v: np.ndarray, t: int) -> np.ndarray:
    mt = M.matrix.T.tocsr()
    for _ in range(t):
        v = mt @ v
    return v


def exact_t_step(M: MarkovChain, u: int, t: int) -> np.ndarray:
    """``e_u M^t`` by repeated sparse vector-matrix products."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    e = np.zeros(M.n)
    e[u] = 1.0
    return _propagate(M, e, t)


def exact_average_t_step(M: MarkovChain, t: int) -> np.ndarray:
    if t < 0:
        raise ValueError("t must be nonnegative")
    return _propagate(M, np.full(M.n, 1.0 / M.n), t)


def exact_t_step_all(M: MarkovChain, t: int) -> np.ndarray:
    """Dense matrix whose row u is ``e_u M^t``. Small chains only."""
    out = np.eye(M.n)
    for _ in range(t):
        out = np.asarray((M.matrix.T @ out.T).T)
    return out


def mixing_distances(M: MarkovChain, t: int) -> np.ndarray:
    """``||e_u M^t - s_{M,t}||_1`` for every state u."""
    rows = exact_t_step_all(M, t)
    return np.abs(rows - rows.mean(axis=0)).sum(axis=1)


@dataclass(frozen=True)
class MixingParams:
    t: int
    epsilon: float
    delta: float = 0.1
    rho: float = 0.1

    def __post_init__(self):
        if self.t < 1:
            raise ValueError("t must be at least 1")
        if not 0 < self.epsilon <= 2:
            raise ValueError("epsilon must lie in (0, 2]")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if not 0 < self.rho < 1:
            raise ValueError("rho must lie in (0, 1)")


def mixing_test(M: MarkovChain, params: MixingParams, rng: np.random.Generator,
                closeness: ClosenessTester = l1_distance_test, method: str = "binary") -> Verdict:
    """Compare every state's t-step distribution with the average one at confidence delta/n."""
    avg = average_t_step_sampler(M, params.t, method)
    samples = 0
    tested = []
    for u in range(M.n):
        v = closeness(WalkSampler(M, u, params.t, method), avg, params.epsilon, params.delta / M.n, rng)
        samples += v.samples
        tested.append({"state": u + 1, "decision": v.decision, "phase": v.phase})
        if not v.accept:
            return Verdict(False, "mixing", samples, {"mixing": samples},
                           {"rejected_state": u + 1, "states": tested})
    return Verdict(True, "mixing", samples, {"mixing": samples}, {"states": tested})


def almost_mixing_test(M: MarkovChain, params: MixingParams, rng: np.random.Generator,
                       closeness: ClosenessTester = l1_distance_test, *, c: float = 3.0,
                       method: str = "binary") -> Verdict:
    """Test ``ceil(c ln(1/delta) / rho)`` uniformly random states at confidence delta*rho."""
    rounds = math.ceil(c / params.rho * math.log(1.0 / params.delta))
    avg = average_t_step_sampler(M, params.t, method)
    samples = 0
    picked = []
    for _ in range(rounds):
        u = int(rng.integers(M.n))
        picked.append(u + 1)
        v = closeness(WalkSampler(M, u, params.t, method), avg, params.epsilon,
                      params.delta * params.rho, rng)
        samples += v.samples
        if not v.accept:
            return Verdict(False, "almost_mixing", samples, {"almost_mixing": samples},
                           {"rounds": rounds, "rejected_state": u + 1, "states": picked})
    return Verdict(True, "almost_mixing", samples, {"almost_mixing": samples},
                   {"rounds": rounds, "states": picked})


class StateClass(enum.Enum):
    SMOOTH = "smooth"
    NORMAL = "normal"
    BAD = "bad"


def classify_states_exact(M: MarkovChain, t: int, epsilon: float) -> list[StateClass]:
    """Exact normal/bad/smooth labels for all states.

    Normal: ``||e_u M^t - s_{M,t}||_1 <= eps``. Smooth: normal at every
    horizon in ``[t, 2t]`` (against ``s_{M,t}``) and a 2t-step walk hits a
    bad state with probability at most ``eps``; the hitting probability
    comes from a dynamic program with bad states absorbing.
    """
    rows = exact_t_step_all(M, t)
    s = rows.mean(axis=0)
    normal = np.abs(rows - s).sum(axis=1) <= epsilon
    close_all = normal.copy()
    for _ in range(t):
        rows = np.asarray((M.matrix.T @ rows.T).T)
        close_all &= np.abs(rows - s).sum(axis=1) <= epsilon
    bad = (~normal).astype(np.float64)
    hit = bad.copy()
    P = M.matrix
    for _ in range(2 * t):
        hit = np.maximum(bad, (1.0 - bad) * (P @ hit))
    smooth = close_all & (hit <= epsilon)
    return [StateClass.SMOOTH if smooth[u] else StateClass.NORMAL if normal[u] else StateClass.BAD
            for u in range(M.n)]


def classify_state_exact(M: MarkovChain, u: int, t: int, epsilon: float) -> StateClass:
    return classify_states_exact(M, t, epsilon)[u]


def transform_F(M: MarkovChain, t: int, epsilon: float) -> MarkovChain:
    """Redirect every bad state's row to the lowest-indexed smooth state."""
    classes = classify_states_exact(M, t, epsilon)
    smooth = [u for u, c in enumerate(classes) if c is StateClass.SMOOTH]
    if not smooth:
        raise ValueError("no smooth state to redirect bad rows to")
    target = smooth[0]
    rows = M.rows
    for u, c in enumerate(classes):
        if c is StateClass.BAD:
            rows[u] = [(target, 1.0)]
    return MarkovChain(rows)


def chain_delta(M1: MarkovChain, M2: MarkovChain, t: int) -> tuple[float, float]:
    """(fraction of differing entries over d*n, ``||s_{M1,t} - s_{M2,t}||_1``)."""
    if M1.n != M2.n:
        raise ValueError(f"shape mismatch: n={M1.n} vs n={M2.n}")
    d = max(M1.max_degree, M2.max_degree)
    diff = (M1.matrix - M2.matrix).tocsr()
    diff.eliminate_zeros()
    changed = int(np.count_nonzero(np.abs(diff.data) > 1e-12))
    gap = float(np.abs(exact_average_t_step(M1, t) - exact_average_t_step(M2, t)).sum())
    return changed / (d * M1.n), gap


def test_mixing(M: MarkovChain, t: int, epsilon: float, rng: np.random.Generator,
                closeness: ClosenessTester = l1_distance_test, *, c: float = 4.0,
                walk_delta: float | None = None, horizon_delta: float | None = None,
                method: str = "binary") -> Verdict:
    """Property test: is ``M`` close to a chain that mixes in 2t steps?

    Picks ``k = ceil(c/eps)`` start states uniformly and ``k`` from the
    average t-step distribution. From each start, ``k`` walks of 2t steps
    test every visited state against ``s_{M,t}`` (confidence 1/(6t)), then
    the start itself is tested at horizons t..2t (confidence 1/(3t)).
    """
    if t < 1:
        raise ValueError("t must be at least 1")
    walk_delta = 1.0 / (6 * t) if walk_delta is None else walk_delta
    horizon_delta = 1.0 / (3 * t) if horizon_delta is None else horizon_delta
    k = math.ceil(c / epsilon)
    avg = average_t_step_sampler(M, t, method)
    starts = np.concatenate([rng.integers(M.n, size=k), avg.draw(rng, k)])
    samples = 0
    checks = 0

    def run(sampler, delta):
        nonlocal samples, checks
        v = closeness(sampler, avg, epsilon, delta, rng)
        samples += v.samples
        checks += 1
        return v.accept

    for i, u0 in enumerate(starts.tolist()):
        for _ in range(k):
            u = u0
            for _ in range(2 * t):
                u = next_node(M, u, rng, method)
                if not run(WalkSampler(M, u, t, method), walk_delta):
                    return Verdict(False, "walk", samples, {"test_mixing": samples},
                                   {"k": k, "checks": checks, "start": u0 + 1, "rejected_state": u + 1})
        for tau in range(t, 2 * t + 1):
            if not run(WalkSampler(M, u0, tau, method), horizon_delta):
                return Verdict(False, "horizon", samples, {"test_mixing": samples},
                               {"k": k, "checks": checks, "start": u0 + 1, "horizon": tau})
    return Verdict(True, "test_mixing", samples, {"test_mixing": samples},
                   {"k": k, "checks": checks, "starts": (starts + 1).tolist()})


test_mixing.__test__ = False  # not a pytest test despite the name


def complete_chain(n: int) -> MarkovChain:
    """Every row uniform over all n states, so ``e_u M = U`` after one step."""
    return MarkovChain([[(v, 1.0 / n) for v in range(n)] for _ in range(n)])


def lazy_complete_chain(n: int, stay: float = 0.5) -> MarkovChain:
    """Stay put with probability ``stay``, otherwise jump uniformly."""
    rows = []
    for u in range(n):
        rows.append([(v, (1.0 - stay) / n + (stay if v == u else 0.0)) for v in range(n)])
    return MarkovChain(rows)


def cycle_chain(n: int, shift: int = 1) -> MarkovChain:
    """Deterministic rotation ``u -> u + shift mod n``; never mixes."""
    return MarkovChain([[((u + shift) % n, 1.0)] for u in range(n)])
