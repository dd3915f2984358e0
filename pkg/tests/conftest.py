"""Shared independent oracles for the test suite.

These deliberately avoid the library's own fast paths: distances are counted
pair by pair and optima found by exhaustive enumeration, so they can vouch
for the optimized implementations.
"""

from itertools import permutations as iter_permutations

import numpy as np


def naive_kendall(a, b):
    """O(rho^2) discordant-pair count."""
    a = np.asarray(a)
    b = np.asarray(b)
    pos_a = np.argsort(a)
    pos_b = np.argsort(b)
    count = 0
    for i in range(a.size):
        for j in range(i + 1, a.size):
            if (pos_a[i] < pos_a[j]) != (pos_b[i] < pos_b[j]):
                count += 1
    return count


def brute_force_weighted_kemeny(labels, weights, rho):
    """Exhaustive weighted Kemeny optimum: (best permutation, best objective).

    Scans S_rho in lexicographic order with strict improvement, so ties
    resolve to the lexicographically smallest optimum.
    """
    best, best_cost = None, np.inf
    for cand in iter_permutations(range(rho)):
        cost = sum(w * naive_kendall(lab, cand) for w, lab in zip(weights, labels))
        if cost < best_cost - 1e-12:
            best, best_cost = cand, cost
    return np.array(best), best_cost
