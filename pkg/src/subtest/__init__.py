"""Sublinear-sample closeness, uniformity and Markov-chain mixing testers."""
from .closeness_tests import (Constants, TestParams, Verdict, big_elements, estimate_l2_norm_sq,
                              filtered_sampler, l1_distance_test, l2_distance_test, required_m_l2,
                              required_m_linf_aware, uniformity_test)
from .collision_stats import (CollisionCounts, Fingerprint, cross_collisions, fingerprint, rs_statistic,
                              self_collisions, standard_form, variance_bound)
from .dist_core import (ExplicitDistribution, Sampler, SampleSet, draw_sample_set, exact_collision_probability,
                        exact_l1_distance, exact_l2_distance, exact_linf, make_sampler)
from .hard_instances import (InstancePair, biased_coin_pair, case_samples, disjoint_halves, heavy_light_pair,
                             poissonized_sample, shifted_mass)
from .markov import (MarkovChain, MixingParams, StateClass, almost_mixing_test, average_t_step_sampler,
                     chain_delta, classify_state_exact, exact_average_t_step, exact_t_step, mixing_test,
                     next_node, transform_F, walk)

__version__ = "0.1.0"
