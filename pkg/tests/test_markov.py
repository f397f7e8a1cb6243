import json
import math

import numpy as np
import pytest

from conftest import hybrid_chain
from subtest.markov import (MarkovChain, MixingParams, StateClass, alias_table, almost_mixing_test,
                            average_t_step_sampler, chain_delta, classify_state_exact, classify_states_exact,
                            complete_chain, cycle_chain, exact_average_t_step, exact_t_step, exact_t_step_all,
                            lazy_complete_chain, mixing_distances, mixing_test, next_node, test_mixing,
                            transform_F, walk, walk_many)


def random_chain(n, d, seed):
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(n):
        targets = rng.choice(n, size=d, replace=False)
        rows.append(list(zip(targets.tolist(), rng.dirichlet(np.ones(d)).tolist())))
    return MarkovChain(rows)


def f_of(eps):
    return eps ** (4 / 3) / (32 * 20 ** (1 / 3))


class Fixed:
    """Generator stub returning a fixed uniform variate."""

    def __init__(self, u):
        self.u = u

    def random(self, size=None):
        return self.u if size is None else np.full(size, self.u)


class TestChain:
    def test_validation(self):
        with pytest.raises(ValueError):
            MarkovChain([[(0, 0.5)]])
        with pytest.raises(ValueError):
            MarkovChain([[(0, 0.5), (0, 0.5)]])
        with pytest.raises(ValueError):
            MarkovChain([[(0, 1.0)], []])
        with pytest.raises(ValueError):
            MarkovChain([[(2, 1.0)], [(0, 1.0)]])
        with pytest.raises(ValueError):
            MarkovChain([[(0, 1.5), (1, -0.5)], [(0, 1.0)]])

    def test_invariants(self):
        M = random_chain(30, 5, 1)
        for u in range(M.n):
            targets, probs = M.row(u)
            assert np.all(np.diff(targets) > 0)
            assert abs(probs.sum() - 1) < 1e-9
        assert np.all(np.diff(M.cumsums[M.indptr[1] - 1:M.indptr[1]]) >= 0)
        assert np.allclose(M.cumsums[M.indptr[1:] - 1], 1.0)
        assert M.max_degree == 5 and M.nnz == 150

    def test_json_is_one_indexed(self, tmp_path):
        M = MarkovChain([[(1, 1.0)], [(0, 0.25), (1, 0.75)]])
        d = M.to_dict()
        assert d == {"n": 2, "rows": [[[2, 1.0]], [[1, 0.25], [2, 0.75]]]}
        path = tmp_path / "c.json"
        M.save(path)
        assert MarkovChain.load(path) == M
        assert json.loads(path.read_text()) == d

    def test_from_dict_checks_n(self):
        with pytest.raises(ValueError):
            MarkovChain.from_dict({"n": 3, "rows": [[[1, 1.0]]]})

    def test_from_dense(self):
        P = np.array([[0.5, 0.5, 0], [0, 0.5, 0.5], [0.5, 0, 0.5]])
        assert np.array_equal(MarkovChain.from_dense(P).dense(), P)


class TestNextNode:
    def test_deterministic_row(self, rng):
        M = cycle_chain(5, 2)
        assert {next_node(M, 1, rng) for _ in range(100)} == {3}

    def test_fair_row(self, rng):
        M = MarkovChain([[(0, 0.5), (1, 0.5)], [(1, 1.0)]])
        x = M.step(np.zeros(10**5, dtype=int), rng)
        assert abs(np.mean(x == 0) - 0.5) < 0.01
        y = [next_node(M, 0, rng) for _ in range(20000)]
        assert abs(np.mean(y) - 0.5) < 0.02

    def test_boundary_goes_up(self):
        M = MarkovChain([[(0, 0.25), (1, 0.25), (2, 0.5)], [(1, 1.0)], [(2, 1.0)]])
        assert next_node(M, 0, Fixed(0.25)) == 1
        assert next_node(M, 0, Fixed(0.5)) == 2
        assert M.step([0, 0], Fixed(0.25)).tolist() == [1, 1]
        assert next_node(M, 0, Fixed(0.0)) == 0

    def test_bad_state(self, rng):
        with pytest.raises(ValueError):
            next_node(complete_chain(3), 3, rng)
        with pytest.raises(ValueError):
            next_node(complete_chain(3), 0, rng, method="bogus")

    def test_alias_table_exact(self):
        probs = np.array([0.1, 0.2, 0.3, 0.4])
        keep, alias = alias_table(probs)
        k = len(probs)
        implied = keep / k
        for j in range(k):
            implied[alias[j]] += (1 - keep[j]) / k
        assert np.allclose(implied, probs)

    def test_alias_matches_binary(self, rng):
        M = random_chain(10, 4, 3)
        for u in range(M.n):
            a = np.bincount(M.step(np.full(10**5, u), rng, "alias"), minlength=M.n) / 1e5
            b = np.bincount(M.step(np.full(10**5, u), rng, "binary"), minlength=M.n) / 1e5
            assert np.abs(a - b).sum() <= 0.03
            assert np.abs(a - M.dense()[u]).sum() <= 0.02
        assert next_node(M, 0, rng, "alias") in M.row(0)[0]


class TestWalks:
    def test_t_zero(self, rng):
        assert walk(complete_chain(4), 2, 0, rng) == 2
        with pytest.raises(ValueError):
            walk(complete_chain(4), 2, -1, rng)

    def test_cycle(self, rng):
        assert {walk(cycle_chain(4), 0, 2, rng) for _ in range(50)} == {2}
        assert set(walk_many(cycle_chain(4), [0, 1, 3], 2, rng).tolist()) == {2, 3, 1}

    def test_complete_uniform(self, rng):
        x = walk_many(complete_chain(5), np.zeros(10**5, dtype=int), 1, rng)
        assert np.abs(np.bincount(x, minlength=5) / 1e5 - 0.2).sum() <= 0.02

    @pytest.mark.parametrize("t", [1, 7, 20])
    def test_endpoints_match_oracle(self, rng, t):
        M = random_chain(50, 3, t)
        x = walk_many(M, np.full(10**6, 4), t, rng)
        assert np.abs(np.bincount(x, minlength=50) / 1e6 - exact_t_step(M, 4, t)).sum() <= 0.02


class TestAverageSampler:
    def test_t_zero_uniform(self, rng):
        x = average_t_step_sampler(cycle_chain(6), 0).draw(rng, 10**5)
        assert np.abs(np.bincount(x, minlength=6) / 1e5 - 1 / 6).sum() <= 0.02

    def test_cycle_uniform(self, rng):
        M = cycle_chain(7)
        assert np.allclose(exact_average_t_step(M, 13), 1 / 7)
        x = average_t_step_sampler(M, 13).draw(rng, 10**5)
        assert np.abs(np.bincount(x, minlength=7) / 1e5 - 1 / 7).sum() <= 0.02

    def test_six_states(self, rng):
        M = random_chain(6, 3, 11)
        s = average_t_step_sampler(M, 3)
        x = s.draw(rng, 10**6)
        assert np.abs(np.bincount(x, minlength=6) / 1e6 - exact_average_t_step(M, 3)).sum() <= 0.02
        assert 0 <= s.draw(rng) < 6

    def test_negative_t(self):
        with pytest.raises(ValueError):
            average_t_step_sampler(complete_chain(2), -1)


class TestExact:
    def test_t_zero(self):
        assert exact_t_step(complete_chain(4), 1, 0).tolist() == [0, 1, 0, 0]

    def test_hand_square(self):
        M = MarkovChain.from_dense([[0.5, 0.5, 0], [0, 0.5, 0.5], [0.5, 0, 0.5]])
        assert np.allclose(exact_t_step(M, 0, 2), [0.25, 0.5, 0.25])

    def test_doubly_stochastic(self):
        M = MarkovChain.from_dense([[0.5, 0.5, 0], [0, 0.5, 0.5], [0.5, 0, 0.5]])
        for t in range(6):
            assert np.allclose(exact_average_t_step(M, t), 1 / 3)

    def test_sums_preserved(self):
        M = random_chain(40, 4, 5)
        assert abs(exact_t_step(M, 3, 50).sum() - 1) < 1e-9
        rows = exact_t_step_all(M, 5)
        assert np.allclose(rows.sum(axis=1), 1)
        assert np.allclose(rows.mean(axis=0), exact_average_t_step(M, 5))

    def test_cycle_distances(self):
        assert np.allclose(mixing_distances(cycle_chain(50), 10), 2 * (1 - 1 / 50))

    def test_monotone_in_t(self):
        for M in (lazy_complete_chain(20), complete_chain(8), random_chain(12, 12, 0)):
            stat = np.linalg.matrix_power(M.dense(), 200)[0]
            prev = np.abs(exact_t_step_all(M, 1) - stat).sum(axis=1)
            for t in range(2, 15):
                cur = np.abs(exact_t_step_all(M, t) - stat).sum(axis=1)
                assert np.all(cur <= prev + 1e-12)
                prev = cur
            eps = mixing_distances(M, 3).max() + 1e-12
            assert all(mixing_distances(M, t).max() <= eps + 1e-12 for t in range(4, 15))


def test_mixing_params_validation():
    for kw in [dict(t=0, epsilon=0.5), dict(t=1, epsilon=0), dict(t=1, epsilon=0.5, delta=1),
               dict(t=1, epsilon=0.5, rho=0)]:
        with pytest.raises(ValueError):
            MixingParams(**kw)


class TestMixing:
    def test_complete_accepts(self, rng):
        v = mixing_test(complete_chain(20), MixingParams(1, 0.5), rng)
        assert v.accept and len(v.diagnostics["states"]) == 20

    def test_cycle_rejects(self):
        M = cycle_chain(50)
        rej = [not mixing_test(M, MixingParams(10, 0.5), np.random.default_rng(k)).accept for k in range(20)]
        assert np.mean(rej) >= 0.85

    @pytest.mark.slow
    def test_lazy_complete_accepts(self):
        M = lazy_complete_chain(20)
        eps = 1.0
        assert mixing_distances(M, 10).max() <= f_of(eps) / 2
        acc = [mixing_test(M, MixingParams(10, eps), np.random.default_rng(k)).accept for k in range(5)]
        assert np.mean(acc) >= 0.8


def gap_chain(far=0.02, n=50):
    rows = [[(v, 1 / n) for v in range(n)] for _ in range(n - 1)]
    rows.append([(v, (1 - far) / n + (far if v == 0 else 0)) for v in range(n)])
    return MarkovChain(rows)


class TestAlmostMixing:
    def test_complete_accepts(self, rng):
        assert almost_mixing_test(complete_chain(10), MixingParams(1, 1.0), rng).accept

    def test_rounds(self, rng):
        v = almost_mixing_test(complete_chain(5), MixingParams(1, 1.0, delta=0.1, rho=0.1), rng)
        assert v.diagnostics["rounds"] == math.ceil(3 / 0.1 * math.log(10))

    def test_one_mildly_far_state(self):
        M = gap_chain()
        d = mixing_distances(M, 1)
        assert np.sum(d > f_of(1.0) / 2) == 1 and d.max() < 0.1
        acc = [almost_mixing_test(M, MixingParams(1, 1.0), np.random.default_rng(k)).accept for k in range(5)]
        assert np.mean(acc) >= 0.8

    def test_one_truly_far_state_is_hit_by_rounds(self):
        # a state that always rejects is picked with prob 1/50 per round
        M = gap_chain(far=1.0)
        assert mixing_distances(M, 1).max() > 1.9
        params = MixingParams(1, 1.0)
        rounds = math.ceil(3 / params.rho * math.log(1 / params.delta))
        predicted = (1 - 1 / 50) ** rounds

        def closeness(sp, sq, eps, delta, rng):
            from subtest.closeness_tests import Verdict
            return Verdict(sp.start != 49, "stub", 0)

        acc = [almost_mixing_test(M, params, np.random.default_rng(k), closeness).accept for k in range(2000)]
        sd = math.sqrt(predicted * (1 - predicted) / 2000)
        assert abs(np.mean(acc) - predicted) < 4 * sd

    def test_cycle_rejects(self):
        M = cycle_chain(50)
        rej = [not almost_mixing_test(M, MixingParams(10, 0.5), np.random.default_rng(k)).accept for k in range(20)]
        assert np.mean(rej) >= 0.85


class TestClassification:
    def test_complete_all_smooth(self):
        assert set(classify_states_exact(complete_chain(7), 2, 0.1)) == {StateClass.SMOOTH}

    def test_cycle_all_bad(self):
        assert set(classify_states_exact(cycle_chain(9), 3, 2 * (1 - 1 / 9) - 0.01)) == {StateClass.BAD}

    def test_hybrid(self, hybrid):
        classes = classify_states_exact(hybrid, 3, 0.25)
        assert classes[25] is StateClass.BAD
        assert all(c is StateClass.SMOOTH for c in classes[:25])
        assert classify_state_exact(hybrid, 25, 3, 0.25) is StateClass.BAD

    def test_smooth_implies_normal(self):
        for seed in range(5):
            M = random_chain(15, 3, seed)
            d = mixing_distances(M, 2)
            for u, c in enumerate(classify_states_exact(M, 2, 0.8)):
                if c is not StateClass.BAD:
                    assert d[u] <= 0.8
                else:
                    assert d[u] > 0.8

    def test_matches_sink_oracle(self):
        # independent oracle: bad states made absorbing, hit probability read off a dense matrix power
        hit_decided = 0
        for seed in range(30):
            M = random_chain(10, 2, seed)
            t, eps = 2, 0.9
            P = M.dense()
            s = np.linalg.matrix_power(P, t).mean(axis=0)
            dist = {tau: np.abs(np.linalg.matrix_power(P, tau) - s).sum(axis=1) for tau in range(t, 2 * t + 1)}
            bad = dist[t] > eps
            A = np.where(bad[:, None], np.eye(10), P)
            hit = np.linalg.matrix_power(A, 2 * t)[:, bad].sum(axis=1)
            close = np.all([dist[tau] <= eps for tau in dist], axis=0)
            want = [StateClass.BAD if b else StateClass.SMOOTH if c and h <= eps else StateClass.NORMAL
                    for b, c, h in zip(bad, close, hit)]
            assert classify_states_exact(M, t, eps) == want
            hit_decided += int(np.sum(~bad & close & (hit > eps)))
        assert hit_decided > 0


class TestTransform:
    def test_identity_without_bad(self):
        M = complete_chain(6)
        assert transform_F(M, 2, 0.1) == M

    def test_no_smooth(self):
        with pytest.raises(ValueError):
            transform_F(cycle_chain(9), 3, 0.5)

    def test_hybrid_single_row(self, hybrid):
        t, eps = 3, 0.25
        Mt = transform_F(hybrid, t, eps)
        assert Mt.rows[25] == [(0, 1.0)]
        assert Mt.rows[:25] == hybrid.rows[:25]
        assert np.abs(Mt.dense() - hybrid.dense()).sum(axis=1).nonzero()[0].tolist() == [25]
        diff = np.count_nonzero(np.abs(Mt.dense() - hybrid.dense()) > 0)
        assert diff <= 1 * (hybrid.max_degree + 1)
        assert np.allclose(Mt.dense().sum(axis=1), 1)

    def test_lemma_properties(self, hybrid):
        t, eps = 3, 0.25
        Mt = transform_F(hybrid, t, eps)
        classes = classify_states_exact(hybrid, t, eps)
        s = exact_average_t_step(hybrid, t)
        for u, c in enumerate(classes):
            if c is not StateClass.SMOOTH:
                continue
            for tau in range(t, 2 * t + 1):
                a, b = exact_t_step(hybrid, u, tau), exact_t_step(Mt, u, tau)
                assert np.abs(a - b).sum() <= eps
                assert np.abs(s - b).sum() <= 2 * eps
        smooth = np.array([c is StateClass.SMOOTH for c in classes])
        assert smooth.mean() >= 1 - eps and s[smooth].sum() >= 1 - eps
        rows = exact_t_step_all(Mt, 2 * t)
        assert np.abs(rows - s).sum(axis=1).max() <= 4 * eps

    def test_chain_delta(self, hybrid):
        assert chain_delta(hybrid, hybrid, 3) == (0.0, 0.0)
        Mt = transform_F(hybrid, 3, 0.25)
        frac, gap = chain_delta(hybrid, Mt, 3)
        d = hybrid.max_degree
        assert 0 < frac <= (d + 1) / (d * hybrid.n)
        assert gap <= 2 * 0.25
        with pytest.raises(ValueError):
            chain_delta(hybrid, complete_chain(3), 1)


class TestTestMixing:
    def test_complete_accepts(self, rng):
        v = test_mixing(complete_chain(10), 1, 1.0, rng)
        assert v.accept and v.diagnostics["k"] == 4
        assert v.diagnostics["checks"] == 8 * (4 * 2 + 2)

    def test_cycle_rejects(self):
        M = cycle_chain(20)
        rej = [not test_mixing(M, 2, 1.0, np.random.default_rng(k)).accept for k in range(15)]
        assert np.mean(rej) >= 2 / 3

    def test_walks_restart(self, rng):
        starts = []

        def closeness(sp, sq, eps, delta, rng):
            from subtest.closeness_tests import Verdict
            starts.append((sp.start, sp.t))
            return Verdict(True, "stub", 0)

        M = cycle_chain(100)
        v = test_mixing(M, 2, 2.0, rng, closeness, c=2.0)
        u0 = v.diagnostics["starts"][0] - 1
        # k=1: one walk of 4 steps, then horizons 2..4
        assert starts[:7] == [((u0 + 1) % 100, 2), ((u0 + 2) % 100, 2), ((u0 + 3) % 100, 2),
                              ((u0 + 4) % 100, 2), (u0, 2), (u0, 3), (u0, 4)]

    def test_invalid_t(self, rng):
        with pytest.raises(ValueError):
            test_mixing(complete_chain(3), 0, 0.5, rng)
