"""``subtest`` command-line entry point.

Exit codes: 0 accept/success, 1 reject, 2 usage or I/O error. Every
randomized command echoes the seed it used; all output is JSON on stdout.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

import numpy as np

from . import harness, markov
from .closeness_tests import (Constants, TestParams, l1_distance_test, l2_distance_test, required_m_l2,
                              uniformity_test)
from .dist_core import (ExplicitDistribution, exact_collision_probability, exact_l1_distance,
                        exact_l2_distance, exact_linf, make_sampler)
from .hard_instances import biased_coin_pair, heavy_light_pair


class UsageError(Exception):
    pass


def _add_constants(p: argparse.ArgumentParser) -> None:
    d = Constants()
    p.add_argument("--c-m", type=float, default=d.c_m)
    p.add_argument("--c-big-m", type=float, default=d.c_big_m)
    p.add_argument("--c", type=float, default=d.c)
    p.add_argument("--c-iter", type=float, default=d.c_iter)


def _add_seed(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="omit to draw one from OS entropy")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subtest", description="Sublinear distribution and mixing testers")
    sub = parser.add_subparsers(dest="command")

    ex = sub.add_parser("exact", help="exact distances between explicit distributions")
    ex.add_argument("quantity", choices=["l1", "l2", "linf", "collision"])
    ex.add_argument("--p", required=True)
    ex.add_argument("--q")

    for name in ("l2", "l1"):
        sp = sub.add_parser(name, help=f"{name} closeness test")
        sp.add_argument("--p", required=True)
        sp.add_argument("--q", required=True)
        sp.add_argument("--eps", type=float, required=True)
        sp.add_argument("--delta", type=float, default=0.1)
        if name == "l2":
            sp.add_argument("--m", type=int, default=None)
        _add_seed(sp)
        _add_constants(sp)

    un = sub.add_parser("uniformity", help="test closeness to uniform")
    un.add_argument("--p", required=True)
    un.add_argument("--eps", type=float, required=True)
    un.add_argument("--delta", type=float, default=0.1)
    _add_seed(un)
    _add_constants(un)

    for name in ("mixing", "almost-mixing", "test-mixing"):
        mp = sub.add_parser(name, help=f"{name} test on a Markov chain")
        mp.add_argument("--chain", required=True)
        mp.add_argument("--t", type=int, required=True)
        mp.add_argument("--eps", type=float, required=True)
        mp.add_argument("--delta", type=float, default=0.1)
        mp.add_argument("--rho", type=float, default=0.1)
        _add_seed(mp)
        _add_constants(mp)

    gen = sub.add_parser("gen", help="write hard instances as distribution JSON")
    gsub = gen.add_subparsers(dest="generator")
    hl = gsub.add_parser("heavy-light")
    hl.add_argument("--n", type=int, required=True)
    coin = gsub.add_parser("coin")
    coin.add_argument("--eps", type=float, required=True)
    for g in (hl, coin):
        g.add_argument("--out-p")
        g.add_argument("--out-q")

    exp = sub.add_parser("experiment", help="Monte Carlo accept-rate experiment")
    exp.add_argument("--config", required=True)
    exp.add_argument("--out")
    exp.add_argument("--csv")
    exp.add_argument("--workers", type=int, default=None)
    return parser


def _load_dist(path: str) -> ExplicitDistribution:
    try:
        return ExplicitDistribution.load(path)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read distribution {path}: {exc}") from exc


def _load_chain(path: str) -> markov.MarkovChain:
    try:
        return markov.MarkovChain.load(path)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read chain {path}: {exc}") from exc


def _constants(args) -> Constants:
    try:
        return Constants(args.c_m, args.c_big_m, args.c, args.c_iter)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _seed(args) -> int:
    if args.seed is None:
        return int(np.random.SeedSequence().entropy % 2**63)
    return args.seed


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, sort_keys=True)
    sys.stdout.write("\n")


def _cmd_exact(args) -> int:
    p = _load_dist(args.p)
    if args.quantity == "linf":
        value = exact_linf(p)
    else:
        if args.q is None:
            raise UsageError(f"exact {args.quantity} needs --q")
        q = _load_dist(args.q)
        if p.n != q.n:
            raise UsageError(f"domain mismatch: n={p.n} vs n={q.n}")
        fn = {"l1": exact_l1_distance, "l2": exact_l2_distance, "collision": exact_collision_probability}
        value = fn[args.quantity](p, q)
    _emit({"quantity": args.quantity, "value": value})
    return 0


def _cmd_closeness(args) -> int:
    consts = _constants(args)
    seed = _seed(args)
    rng = np.random.default_rng(seed)
    resolved = {"command": args.command, "seed": seed, "delta": args.delta, "epsilon": args.eps,
                "constants": asdict(consts)}
    try:
        if args.command == "uniformity":
            p = _load_dist(args.p)
            resolved["p"] = args.p
            verdict = uniformity_test(make_sampler(p), args.eps, args.delta, rng, constants=consts)
        else:
            p, q = _load_dist(args.p), _load_dist(args.q)
            if p.n != q.n:
                raise UsageError(f"domain mismatch: n={p.n} vs n={q.n}")
            TestParams(args.eps, args.delta, consts)
            resolved.update(p=args.p, q=args.q)
            if args.command == "l2":
                m = args.m or required_m_l2(max(exact_linf(p), exact_linf(q)), args.eps, consts.c_m)
                resolved["m"] = m
                verdict = l2_distance_test(make_sampler(p), make_sampler(q), m, args.eps, args.delta, rng,
                                           constants=consts)
            else:
                verdict = l1_distance_test(make_sampler(p), make_sampler(q), args.eps, args.delta, rng,
                                           constants=consts)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit({"params": resolved, "verdict": verdict.to_dict()})
    return 0 if verdict.accept else 1


def _cmd_mixing(args) -> int:
    consts = _constants(args)
    seed = _seed(args)
    rng = np.random.default_rng(seed)
    chain = _load_chain(args.chain)
    try:
        params = markov.MixingParams(args.t, args.eps, args.delta, args.rho)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    def closeness(sp, sq, eps, delta, rng):
        return l1_distance_test(sp, sq, eps, delta, rng, constants=consts)

    if args.command == "mixing":
        verdict = markov.mixing_test(chain, params, rng, closeness)
    elif args.command == "almost-mixing":
        verdict = markov.almost_mixing_test(chain, params, rng, closeness)
    else:
        verdict = markov.test_mixing(chain, params.t, params.epsilon, rng, closeness)
    resolved = {"command": args.command, "chain": args.chain, "seed": seed, **asdict(params),
                "constants": asdict(consts)}
    _emit({"params": resolved, "verdict": verdict.to_dict()})
    return 0 if verdict.accept else 1


def _cmd_gen(args) -> int:
    if args.generator is None:
        raise UsageError("gen needs a generator: heavy-light or coin")
    try:
        pair = heavy_light_pair(args.n) if args.generator == "heavy-light" else biased_coin_pair(args.eps)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    for dist, path in ((pair.p, args.out_p), (pair.q, args.out_q)):
        if path:
            try:
                dist.save(path)
            except OSError as exc:
                raise UsageError(f"cannot write {path}: {exc}") from exc
    _emit({"generator": args.generator, "p": pair.p.to_dict(), "q": pair.q.to_dict(),
           "exact_l1": pair.exact_l1, "exact_l2": pair.exact_l2})
    return 0


def _cmd_experiment(args) -> int:
    try:
        with open(args.config) as fh:
            raw = json.load(fh)
        grid = raw.pop("grid", None)
        if args.workers is not None:
            raw["workers"] = args.workers
        cfg = harness.ExperimentConfig.from_dict(raw)
    except (OSError, ValueError, TypeError) as exc:
        raise UsageError(f"bad experiment config {args.config}: {exc}") from exc
    try:
        if grid is None:
            rows = [({}, harness.run_experiment(cfg))]
        else:
            rows = harness.sweep(grid, cfg)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"bad experiment config {args.config}: {exc!r}") from exc
    if grid is None:
        out = rows[0][1].to_dict()
        print(rows[0][1].to_text(), file=sys.stderr)
    else:
        out = {"grid": grid, "rows": [{"point": pt, "report": rep.to_dict()} for pt, rep in rows]}
        print(harness.sweep_table(rows), file=sys.stderr)
    try:
        if args.out:
            with open(args.out, "w") as fh:
                json.dump(out, fh, indent=2)
        if args.csv:
            with open(args.csv, "w") as fh:
                fh.write(harness.sweep_csv(rows if grid is not None else [({"tester": cfg.tester}, rows[0][1])]))
    except OSError as exc:
        raise UsageError(f"cannot write output: {exc}") from exc
    _emit(out)
    return 0


COMMANDS = {
    "exact": _cmd_exact, "l2": _cmd_closeness, "l1": _cmd_closeness, "uniformity": _cmd_closeness,
    "mixing": _cmd_mixing, "almost-mixing": _cmd_mixing, "test-mixing": _cmd_mixing,
    "gen": _cmd_gen, "experiment": _cmd_experiment,
}


def dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else argv
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"subtest: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
