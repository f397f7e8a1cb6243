# Exact distances between explicit distributions.
# These are the ground truth every tester is checked against.
import numpy as np

from subtest import ExplicitDistribution
from subtest.dist_core import exact_collision_probability, exact_l1_distance, exact_l2_distance, exact_linf
from subtest.hard_instances import heavy_light_pair

p = ExplicitDistribution.from_weights([4, 3, 2, 1])
q = ExplicitDistribution.uniform(4)
print("p =", p.probs)
print("l1(p, U) =", exact_l1_distance(p, q))
print("l2(p, U) =", exact_l2_distance(p, q))
print("||p||_inf =", exact_linf(p))

# collision probability of p with itself is ||p||_2^2
print("p.p =", exact_collision_probability(p, p), "vs", np.dot(p.probs, p.probs))

# ||p||_2^2 - 1/n equals ||p - U||_2^2, the identity behind uniformity testing
print("gap identity:", np.dot(p.probs, p.probs) - 1 / 4, exact_l2_distance(p, q) ** 2)

# heavy/light pair: identical heavy parts, disjoint light parts, l1 distance exactly 1
pair = heavy_light_pair(64)
print("heavy/light n=64: l1 =", pair.exact_l1, " l2 =", round(pair.exact_l2, 4))

# distributions round-trip through JSON
print(ExplicitDistribution.from_dict(p.to_dict()) == p)
