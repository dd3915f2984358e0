"""Coordinates for structured labels: pair-sign vectors and classical MDS.

Two ways to put labels into coordinate space so that moment arithmetic works:
rankings embed exactly into signed pair-order vectors (the dot product *is*
an affine function of Kendall distance), while arbitrary finite metrics embed
approximately via classical MDS, with the worst-case contraction reported as
a distortion figure.

Run:  python3 demos/embeddings_and_distortion.py
"""

import numpy as np

from uws import classical_mds, distortion, graph_hop_metric
from uws import permutations as perm

print("== rankings: the pair-sign embedding is exact ==")
rng = np.random.default_rng(0)
rho = 6
c2 = perm.num_pairs(rho)
a, b = rng.permutation(rho), rng.permutation(rho)
dot = int(perm.pair_sign_embed(a) @ perm.pair_sign_embed(b))
d = perm.kendall_tau(a, b)
print(f"a = {a}, b = {b}")
print(f"dot(g(a), g(b)) = {dot},  C({rho},2) - 2*d_tau = {c2 - 2 * d}  (always equal)")
perms = perm.all_permutations(rho)
g = perm.pair_sign_embed_many(perms).astype(float)
space_dist = (c2 - g @ g.T) / 2.0
from uws import FiniteMetricSpace

eps = distortion(FiniteMetricSpace(space_dist), g, metric_exponent=2.0)
print(f"distortion of the embedding over all of S_{rho}: {eps:.2e}  (isometric)")

print("\n== graphs: MDS embeds hop metrics approximately ==")
edges = [(i, i + 1) for i in range(14)] + [(0, 7), (3, 11), (5, 13)]
space = graph_hop_metric(edges, 15)
for dim in (1, 2, 4, 8):
    report = classical_mds(space, dim=dim)
    print(f"dim={dim}: worst contraction epsilon = {report.epsilon:.3f} "
          f"(scale divided out: {report.scale:.2f})")
print("\nmore coordinates buy less contraction; epsilon is what enters the")
print("parameter-inconsistency budget epsilon * |mu| / e_min.")
