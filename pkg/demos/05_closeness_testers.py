# The l2 and l1 closeness testers, and the uniformity tester.
import numpy as np

from subtest import ExplicitDistribution, make_sampler
from subtest.closeness_tests import l1_distance_test, l2_distance_test, required_m_l2, uniformity_test
from subtest.hard_instances import disjoint_halves, heavy_light_pair

rng = np.random.default_rng(5)

# l2: accept when ||p - q||_2 <= eps/2, reject when > eps
u = make_sampler(ExplicitDistribution.uniform(100))
m = required_m_l2(0.02, 0.2)
print("m per iteration:", m)
print("same:", l2_distance_test(u, u, m, 0.2, 0.1, rng).decision)
pair = disjoint_halves(100)
v = l2_distance_test(make_sampler(pair.p), make_sampler(pair.q), m, 0.19, 0.1, rng)
print("far: ", v.decision, "samples", v.samples)

# l1: heavy elements are counted directly, the rest goes through the l2 test
pair = heavy_light_pair(216)
v = l1_distance_test(make_sampler(pair.p), make_sampler(pair.q), 0.5, 0.1, rng)
print("heavy/light:", v.decision, "in phase", v.phase, v.phase_samples)

# uniformity: estimate ||p||_2^2 and compare with 1/n
print("uniform(400):", uniformity_test(make_sampler(ExplicitDistribution.uniform(400)), 0.5, 0.1, rng).decision)
pm = ExplicitDistribution.point_mass(400, 0)
print("point mass:  ", uniformity_test(make_sampler(pm), 0.5, 0.1, rng).decision)
