"""Longest k-alternating subsequences of random permutations.

Library layout:

- ``kaltseq.core``: predicates, the rank map, greedy provisional
  acceptance, DP and subset oracles.
- ``kaltseq.exact``: exhaustive enumeration with exact rational statistics,
  closed-form moment formulas, the binomial mixture law.
- ``kaltseq.stochastic``: seeded samplers, the thinning transform,
  Kolmogorov-Smirnov statistic, sandwich trials, Monte Carlo estimators.
- ``kaltseq.cli``: the ``kaltseq`` command-line front end.
"""

from kaltseq.core import (
    AltWitness,
    CapacityError,
    dp_longest_k_alternating,
    greedy_k_alternating,
    greedy_x_alternating,
    is_k_alternating,
    is_x_alternating,
    peak_valley_witness,
    rank_permutation,
    subset_oracle,
)

__version__ = "0.1.0"

__all__ = [
    "AltWitness",
    "CapacityError",
    "dp_longest_k_alternating",
    "greedy_k_alternating",
    "greedy_x_alternating",
    "is_k_alternating",
    "is_x_alternating",
    "peak_valley_witness",
    "rank_permutation",
    "subset_oracle",
    "__version__",
]
