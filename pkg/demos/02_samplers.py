# Drawing samples. A sampler is anything with `n` and `draw(rng, size)`.
import numpy as np

from subtest import ExplicitDistribution, make_sampler
from subtest.dist_core import SampleSet, draw_sample_set, empirical_distribution, exact_l1_distance

rng = np.random.default_rng(0)
p = ExplicitDistribution([0.5, 0.25, 0.125, 0.125])
s = make_sampler(p)

print(s.draw(rng))  # one element
print(s.draw(rng, 10))  # ten of them

# a SampleSet stores counts per element
sample = draw_sample_set(s, 10_000, rng)
print("counts", sample.counts, "m =", sample.m)

# the empirical distribution approaches p
for m in (100, 10_000, 1_000_000):
    emp = ExplicitDistribution(empirical_distribution(draw_sample_set(s, m, rng)))
    print(f"m={m:>9}  l1(emp, p) = {exact_l1_distance(emp, p):.4f}")

# same seed, same draws
a = make_sampler(p).draw(np.random.default_rng(42), 5)
b = make_sampler(p).draw(np.random.default_rng(42), 5)
print(a, b, np.array_equal(a, b))

print(SampleSet.from_draws([0, 0, 3], 4).as_mapping())
