# Sparse Markov chains and random walks.
import numpy as np

from subtest.markov import (MarkovChain, average_t_step_sampler, cycle_chain, exact_average_t_step, exact_t_step,
                            mixing_distances, walk, walk_many)

rng = np.random.default_rng(6)
M = MarkovChain.from_dense([[0.5, 0.5, 0], [0, 0.5, 0.5], [0.5, 0, 0.5]])
print(M, "max degree", M.max_degree)
print("e_0 M^2 =", exact_t_step(M, 0, 2))  # (1/4, 1/2, 1/4)

ends = walk_many(M, np.zeros(100_000, dtype=int), 2, rng)
print("empirical  ", np.bincount(ends, minlength=3) / ends.size)

# the alias method gives the same distribution with O(1) draws
ends = walk_many(M, np.zeros(100_000, dtype=int), 2, rng, method="alias")
print("alias      ", np.bincount(ends, minlength=3) / ends.size)

# a deterministic cycle never mixes, although its average distribution is uniform
C = cycle_chain(8)
print("walk on the 8-cycle:", walk(C, 0, 5, rng))
print("average 5-step distribution:", exact_average_t_step(C, 5))
print("distance of every state:", mixing_distances(C, 5))

s = average_t_step_sampler(C, 5)
print(np.bincount(s.draw(rng, 80_000), minlength=8) / 80_000)
