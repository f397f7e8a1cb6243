# Fingerprints forget labels and keep only multiplicities.
# C[i, j] counts elements seen i times in the first sample and j times in the second.
import numpy as np

from subtest.collision_stats import Fingerprint, fingerprint, standard_form
from subtest.dist_core import SampleSet

s1 = SampleSet.from_draws([5, 7, 3, 3, 4], 10)
s2 = SampleSet.from_draws([2, 4, 3, 2, 6], 10)
f = fingerprint(s1, s2)
print(f.entries)  # {(1,0): 2, (0,1): 1, (1,1): 1, (0,2): 1, (2,1): 1}

# relabelling the domain does not change the fingerprint
perm = np.random.default_rng(3).permutation(10)
t1 = SampleSet(s1.counts[perm])
t2 = SampleSet(s2.counts[perm])
print(fingerprint(t1, t2) == f)

# the standard form is a canonical pair of samples with this fingerprint
a, b = standard_form(f)
print("standard form:", a.as_mapping(), b.as_mapping())
print("round trip:", fingerprint(a, b) == f)

print(Fingerprint.from_json(f.to_json()) == f)
