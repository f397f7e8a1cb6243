"""Monte Carlo runner that measures tester accept rates against exact ground truth.

An experiment is a JSON-friendly config naming a tester, an instance and the
tester's parameters. Trial ``i`` always uses the generator seeded by
``SeedSequence(seed, spawn_key=(i,))``, so reports do not depend on worker
count or scheduling order.
"""
from __future__ import annotations

import copy
import csv
import io
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import binomtest

from . import hard_instances as hi
from . import markov
from .closeness_tests import (Constants, l1_distance_test, l2_distance_test, required_m_l2,
                              uniformity_test)
from .dist_core import ExplicitDistribution, exact_l1_distance, exact_l2_distance, exact_linf, make_sampler

TESTERS = ("l2", "l1", "uniformity", "mixing", "almost-mixing", "test-mixing")


@dataclass
class ExperimentConfig:
    tester: str
    instance: dict
    params: dict
    trials: int = 100
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.tester not in TESTERS:
            raise ValueError(f"unknown tester {self.tester!r}; expected one of {TESTERS}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ExperimentReport:
    config: dict
    accept: int
    reject: int
    rate: float
    wilson: tuple[float, float]
    ground_truth: dict
    samples: list[int]
    errors: list[dict] = field(default_factory=list)
    wall_clock: float = 0.0

    @property
    def trials(self) -> int:
        return self.accept + self.reject + len(self.errors)

    def to_dict(self, include_wall_clock: bool = True) -> dict:
        d = asdict(self)
        d["wilson"] = list(self.wilson)
        if not include_wall_clock:
            d.pop("wall_clock")
        return d

    def to_json(self, include_wall_clock: bool = True) -> str:
        return json.dumps(self.to_dict(include_wall_clock), indent=2)

    def to_text(self) -> str:
        cfg = self.config
        lines = [
            f"tester        {cfg['tester']}",
            f"trials        {self.trials}",
            f"accept        {self.accept}",
            f"reject        {self.reject}",
            f"errors        {len(self.errors)}",
            f"accept rate   {self.rate:.4f}",
            f"wilson 95%    [{self.wilson[0]:.4f}, {self.wilson[1]:.4f}]",
            f"mean samples  {np.mean(self.samples) if self.samples else 0:.1f}",
        ]
        for k, v in self.ground_truth.items():
            lines.append(f"{k:<14}{v:.6g}" if isinstance(v, float) else f"{k:<14}{v}")
        lines.append(f"wall clock    {self.wall_clock:.2f}s")
        return "\n".join(lines)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


def build_distribution(spec) -> ExplicitDistribution:
    """Distribution from a spec dict, a probability list, or a JSON file path."""
    if isinstance(spec, str):
        return ExplicitDistribution.load(spec)
    if isinstance(spec, (list, tuple)):
        return ExplicitDistribution(spec)
    kind = spec["kind"]
    if kind == "uniform":
        return ExplicitDistribution.uniform(spec["n"])
    if kind == "point-mass":
        return ExplicitDistribution.point_mass(spec["n"], spec.get("element", 1) - 1)
    if kind == "explicit":
        return ExplicitDistribution(spec["probs"])
    if kind == "file":
        return ExplicitDistribution.load(spec["path"])
    if kind == "shifted":
        return hi.shifted_mass(build_distribution(spec["base"]), spec["l1"])
    if kind in ("heavy-light", "disjoint-halves", "coin"):
        side = spec.get("side", "p")
        pair = build_pair(spec)
        return pair.p if side == "p" else pair.q
    raise ValueError(f"unknown distribution kind {kind!r}")


def build_pair(spec: dict) -> hi.InstancePair:
    kind = spec["kind"]
    if kind == "heavy-light":
        return hi.heavy_light_pair(spec["n"])
    if kind == "disjoint-halves":
        return hi.disjoint_halves(spec["n"])
    if kind == "coin":
        return hi.biased_coin_pair(spec["eps"])
    raise ValueError(f"{kind!r} is not a pair generator")


def build_chain(spec) -> markov.MarkovChain:
    if isinstance(spec, str):
        return markov.MarkovChain.load(spec)
    kind = spec["kind"]
    if kind == "complete":
        return markov.complete_chain(spec["n"])
    if kind == "lazy-complete":
        return markov.lazy_complete_chain(spec["n"], spec.get("stay", 0.5))
    if kind == "cycle":
        return markov.cycle_chain(spec["n"], spec.get("shift", 1))
    if kind == "file":
        return markov.MarkovChain.load(spec["path"])
    if kind == "explicit":
        return markov.MarkovChain.from_dict(spec)
    raise ValueError(f"unknown chain kind {kind!r}")


def _constants(params: dict) -> Constants:
    return Constants(**params.get("constants", {}))


def resolve(cfg: ExperimentConfig) -> tuple[dict, dict]:
    """Build instance objects and exact ground truth for a config."""
    inst = cfg.instance
    truth = {}
    objs = {}
    if cfg.tester in ("mixing", "almost-mixing", "test-mixing"):
        chain = build_chain(inst["chain"])
        t = cfg.params["t"]
        dist = markov.mixing_distances(chain, t)
        objs["chain"] = chain
        truth.update(max_state_distance=float(dist.max()),
                     far_fraction=float(np.mean(dist > cfg.params["epsilon"])))
        return objs, truth
    p = build_distribution(inst["p"])
    objs["p"] = p
    if cfg.tester == "uniformity":
        truth["l1_to_uniform"] = exact_l1_distance(p, ExplicitDistribution.uniform(p.n))
        truth["l2_to_uniform"] = exact_l2_distance(p, ExplicitDistribution.uniform(p.n))
        return objs, truth
    q = build_distribution(inst["q"])
    objs["q"] = q
    truth.update(l1=exact_l1_distance(p, q), l2=exact_l2_distance(p, q),
                 linf=max(exact_linf(p), exact_linf(q)))
    return objs, truth


def run_trial(cfg: ExperimentConfig, objs: dict, trial: int):
    rng = trial_rng(cfg.seed, trial)
    prm = cfg.params
    consts = _constants(prm)
    if cfg.tester == "l2":
        p, q = objs["p"], objs["q"]
        m = prm.get("m") or required_m_l2(max(exact_linf(p), exact_linf(q)), prm["epsilon"], consts.c_m)
        return l2_distance_test(make_sampler(p), make_sampler(q), m, prm["epsilon"], prm["delta"], rng,
                                constants=consts)
    if cfg.tester == "l1":
        return l1_distance_test(make_sampler(objs["p"]), make_sampler(objs["q"]), prm["epsilon"],
                                prm["delta"], rng, constants=consts)
    if cfg.tester == "uniformity":
        return uniformity_test(make_sampler(objs["p"]), prm["epsilon"], prm["delta"], rng, constants=consts)

    chain = objs["chain"]

    def closeness(sp, sq, eps, delta, rng):
        return l1_distance_test(sp, sq, eps, delta, rng, constants=consts)

    mp = markov.MixingParams(prm["t"], prm["epsilon"], prm.get("delta", 0.1), prm.get("rho", 0.1))
    if cfg.tester == "mixing":
        return markov.mixing_test(chain, mp, rng, closeness)
    if cfg.tester == "almost-mixing":
        return markov.almost_mixing_test(chain, mp, rng, closeness, c=prm.get("c_rounds", 3.0))
    return markov.test_mixing(chain, mp.t, mp.epsilon, rng, closeness, c=prm.get("c_k", 4.0))


def _trial_job(args):
    cfg_dict, indices = args
    cfg = ExperimentConfig.from_dict(cfg_dict)
    objs, _ = resolve(cfg)
    out = []
    for i in indices:
        try:
            v = run_trial(cfg, objs, i)
            out.append((i, v.accept, v.samples, None))
        except Exception as exc:  # reported per trial, experiment continues
            out.append((i, None, 0, f"{type(exc).__name__}: {exc}"))
    return out


def wilson_interval(successes: int, n: int) -> tuple[float, float]:
    if n == 0:
        return (0.0, 1.0)
    ci = binomtest(successes, n).proportion_ci(confidence_level=0.95, method="wilson")
    return (float(ci.low), float(ci.high))


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    start = time.perf_counter()
    _, truth = resolve(cfg)
    cfg_dict = cfg.to_dict()
    if cfg.workers == 1:
        results = _trial_job((cfg_dict, range(cfg.trials)))
    else:
        chunks = [(cfg_dict, range(w, cfg.trials, cfg.workers)) for w in range(cfg.workers)]
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = [r for part in pool.map(_trial_job, chunks) for r in part]
    results.sort(key=lambda r: r[0])
    errors = [{"trial": i, "error": e} for i, _, _, e in results if e is not None]
    done = [r for r in results if r[3] is None]
    acc = sum(1 for r in done if r[1])
    rej = len(done) - acc
    rate = acc / len(done) if done else math.nan
    return ExperimentReport(
        config=cfg_dict, accept=acc, reject=rej, rate=rate,
        wilson=wilson_interval(acc, len(done)), ground_truth=truth,
        samples=[r[2] for r in done], errors=errors,
        wall_clock=time.perf_counter() - start,
    )


def chebyshev_bound(variance: float, rho: float) -> float:
    """Chebyshev tail bound ``Pr[|X - EX| > rho] <= min(1, Var X / rho^2)``."""
    if variance < 0 or rho <= 0:
        raise ValueError("need variance >= 0 and rho > 0")
    return min(1.0, variance / rho**2)


INSTANCE_KEYS = ("n", "eps", "l1")


def _apply(cfg_dict: dict, key: str, value) -> None:
    if key in ("trials", "seed", "workers"):
        cfg_dict[key] = value
    elif key in INSTANCE_KEYS:
        hits = 0

        def visit(node):
            nonlocal hits
            if isinstance(node, dict):
                if key in node:
                    node[key] = value
                    hits += 1
                for v in node.values():
                    visit(v)

        visit(cfg_dict["instance"])
        if not hits:
            raise ValueError(f"grid key {key!r} does not appear in the instance")
    else:
        cfg_dict["params"][key] = value


def sweep(grid: dict, base: ExperimentConfig) -> list[tuple[dict, ExperimentReport]]:
    """Run one experiment per point of the cartesian product of ``grid``.

    Keys ``n``/``eps``/``l1`` edit every matching field of the instance,
    ``trials``/``seed``/``workers`` edit the config, anything else (e.g.
    ``epsilon``, ``m``, ``t``) edits the tester params.
    """
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise ValueError("grid must be nonempty")
    keys = list(grid)
    rows = []
    for values in itertools.product(*(grid[k] for k in keys)):
        point = dict(zip(keys, values))
        d = copy.deepcopy(base.to_dict())
        for k, v in point.items():
            _apply(d, k, v)
        rows.append((point, run_experiment(ExperimentConfig.from_dict(d))))
    return rows


def sweep_table(rows: list[tuple[dict, ExperimentReport]]) -> str:
    """Aligned-column text table of a sweep."""
    if not rows:
        return ""
    keys = list(rows[0][0])
    header = keys + ["accept", "reject", "rate", "wilson_lo", "wilson_hi"]
    body = []
    for point, rep in rows:
        body.append([str(point[k]) for k in keys] + [str(rep.accept), str(rep.reject), f"{rep.rate:.3f}",
                                                     f"{rep.wilson[0]:.3f}", f"{rep.wilson[1]:.3f}"])
    widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
    fmt = lambda r: "  ".join(c.rjust(w) for c, w in zip(r, widths))  # noqa: E731
    return "\n".join([fmt(header)] + [fmt(r) for r in body])


def sweep_csv(rows: list[tuple[dict, ExperimentReport]]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    keys = list(rows[0][0])
    w = csv.writer(buf)
    w.writerow(keys + ["accept", "reject", "rate", "wilson_lo", "wilson_hi"])
    for point, rep in rows:
        w.writerow([point[k] for k in keys] + [rep.accept, rep.reject, rep.rate, *rep.wilson])
    return buf.getvalue()
