# Collision counts and the r - s statistic.
# r - s is an unbiased estimate of m^2 ||p - q||_2^2.
import numpy as np

from subtest import make_sampler
from subtest.collision_stats import CollisionCounts, rs_statistic, self_collisions, variance_bound
from subtest.dist_core import SampleSet, draw_sample_set
from subtest.hard_instances import disjoint_halves

x = SampleSet.from_draws([1, 1, 1, 2, 3, 3], 5)
print("self collisions:", self_collisions(x))  # C(3,2) + C(2,2) = 4

rng = np.random.default_rng(1)
pair = disjoint_halves(100)
sp, sq = make_sampler(pair.p), make_sampler(pair.q)
m = 200

vals = []
for _ in range(5000):
    fp, fq, qp, qq = (draw_sample_set(s, m, rng) for s in (sp, sq, sp, sq))
    vals.append(rs_statistic(CollisionCounts.from_samples(fp, fq, qp, qq)))
vals = np.array(vals)

print("mean r - s     ", vals.mean())
print("m^2 ||p-q||^2  ", m * m * pair.exact_l2**2)
print("variance       ", vals.var())
print("bound (c=1)    ", variance_bound(m, 1 / 50, 1))
