"""Finite metric spaces, classical MDS embedding, and distortion measurement.

The distortion convention: embedded distances are first normalized so that no
pair expands relative to the original metric (divide by the maximum expansion
ratio), then epsilon is one minus the worst remaining contraction ratio, so
``1 - epsilon <= d_emb / d_orig <= 1`` holds over all distinct pairs.
"""

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DisconnectedGraphError,
    DomainError,
    InvalidArgumentError,
    InvalidMetricError,
)

__all__ = [
    "FiniteMetricSpace",
    "EmbeddingReport",
    "graph_hop_metric",
    "classical_mds",
    "distortion",
    "distortion_bound",
]

_METRIC_TOL = 1e-9


@dataclass(frozen=True)
class FiniteMetricSpace:
    """N points with an explicit N x N distance matrix.

    Construction validates symmetry, a zero diagonal, and the triangle
    inequality to tolerance 1e-9. Zero distances between distinct points are
    allowed here (pseudometrics arise from embeddings) but rejected by
    :func:`distortion`.
    """

    dist: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.dist, dtype=np.float64)
        if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] < 1:
            raise InvalidMetricError(f"distance matrix must be square, got shape {d.shape}")
        if (d < 0).any():
            raise InvalidMetricError("negative distances")
        if np.abs(np.diag(d)).max(initial=0.0) > _METRIC_TOL:
            raise InvalidMetricError("diagonal must be zero")
        if np.abs(d - d.T).max(initial=0.0) > _METRIC_TOL:
            raise InvalidMetricError("distance matrix must be symmetric")
        # chunked over the midpoint so large spaces stay within memory
        for k in range(d.shape[0]):
            if (d > d[:, k, None] + d[None, k, :] + _METRIC_TOL).any():
                raise InvalidMetricError(f"triangle inequality violated through point {k}")
        object.__setattr__(self, "dist", d)

    @property
    def size(self):
        return int(self.dist.shape[0])


@dataclass(frozen=True)
class EmbeddingReport:
    """Coordinates plus the distortion bookkeeping of the no-expansion normalization.

    ``scale`` is the factor embedded distances were divided by; ``epsilon``
    is the resulting worst contraction, in [0, 1].
    """

    coords: np.ndarray
    target_dim: int
    epsilon: float
    scale: float
    exponent: float = 1.0
    eigenvalues: np.ndarray = field(default=None, repr=False)


def graph_hop_metric(edges, n_nodes):
    """Shortest-hop metric of an undirected graph via all-pairs BFS.

    Parameters
    ----------
    edges : iterable of (u, v)
        Undirected edges over nodes 0..n_nodes-1. Self-loops are ignored.
    n_nodes : int

    Returns
    -------
    FiniteMetricSpace
        Integer-valued hop distances.

    Raises
    ------
    DisconnectedGraphError
        If some pair of nodes has no connecting path.
    """
    if n_nodes < 1:
        raise InvalidArgumentError(f"need n_nodes >= 1, got {n_nodes}")
    adj = [[] for _ in range(n_nodes)]
    for u, v in edges:
        u, v = int(u), int(v)
        if not (0 <= u < n_nodes and 0 <= v < n_nodes):
            raise InvalidArgumentError(f"edge ({u}, {v}) outside 0..{n_nodes - 1}")
        if u == v:
            continue
        adj[u].append(v)
        adj[v].append(u)
    dist = np.full((n_nodes, n_nodes), -1, dtype=np.int64)
    for src in range(n_nodes):
        dist[src, src] = 0
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if dist[src, v] < 0:
                    dist[src, v] = dist[src, u] + 1
                    queue.append(v)
    if (dist < 0).any():
        raise DisconnectedGraphError("graph is disconnected: some hop distances are infinite")
    return FiniteMetricSpace(dist.astype(np.float64))


def _contraction_stats(orig, coords, exponent):
    """(scale, epsilon) of the no-expansion normalization for given coordinates."""
    coords = np.asarray(coords, dtype=np.float64)
    n = orig.shape[0]
    if coords.shape[0] != n:
        raise InvalidArgumentError(f"coords rows {coords.shape[0]} != space size {n}")
    iu, ju = np.triu_indices(n, k=1)
    if iu.size == 0:
        return 1.0, 0.0
    d_orig = orig[iu, ju]
    if (d_orig <= 0).any():
        raise InvalidMetricError("zero original distance between distinct points")
    diff = coords[iu] - coords[ju]
    d_emb = np.sqrt((diff * diff).sum(axis=1)) ** exponent
    ratios = d_emb / d_orig
    scale = float(ratios.max())
    if scale <= 0:
        return 1.0, 1.0
    epsilon = float(1.0 - ratios.min() / scale)
    return scale, min(max(epsilon, 0.0), 1.0)


def distortion(space, coords, metric_exponent=1.0):
    """Worst contraction of an embedding after the no-expansion normalization.

    The embedded distance is ``||x - y||^metric_exponent``. Returns epsilon in
    [0, 1]; an isometric embedding (up to a global constant) gives 0.
    """
    _, epsilon = _contraction_stats(space.dist, coords, metric_exponent)
    return epsilon


def distortion_bound(epsilon, mu_norm, e_min):
    """Parameter inconsistency budget ``epsilon * mu_norm / e_min``.

    ``e_min`` (the curvature floor of the log-partition function over the
    parameter region) is always user-supplied; it has no computable recipe
    here.
    """
    if e_min <= 0:
        raise DomainError(f"e_min must be > 0, got {e_min}")
    if mu_norm < 0:
        raise DomainError(f"mu_norm must be >= 0, got {mu_norm}")
    return epsilon * mu_norm / e_min


def classical_mds(space, dim, metric_exponent=1.0):
    """Classical multidimensional scaling into ``dim`` coordinates.

    Double-centers the squared-distance matrix, takes the top-``dim``
    eigenpairs (negative eigenvalues truncated to zero), and rescales the
    configuration so no pair expands; the residual contraction is reported
    as epsilon.

    Coordinates are deterministic: eigenpairs are ordered by descending
    eigenvalue and each column's sign is fixed by making its
    largest-magnitude entry positive.
    """
    n = space.size
    if not (1 <= dim <= n - 1):
        raise InvalidArgumentError(f"need 1 <= dim <= N-1 = {n - 1}, got {dim}")
    d2 = space.dist**2
    j = np.eye(n) - np.ones((n, n)) / n
    b = -0.5 * j @ d2 @ j
    try:
        evals, evecs = np.linalg.eigh(b)
    except np.linalg.LinAlgError as exc:
        raise InvalidArgumentError(f"eigendecomposition failed: {exc}") from exc
    order = np.argsort(evals)[::-1][:dim]
    evals = np.clip(evals[order], 0.0, None)
    evecs = evecs[:, order]
    flip = np.sign(evecs[np.abs(evecs).argmax(axis=0), np.arange(dim)])
    flip[flip == 0] = 1.0
    coords = evecs * flip * np.sqrt(evals)
    scale, epsilon = _contraction_stats(space.dist, coords, metric_exponent)
    if scale > 0:
        coords = coords / scale ** (1.0 / metric_exponent)
    return EmbeddingReport(
        coords=coords,
        target_dim=dim,
        epsilon=epsilon,
        scale=scale,
        exponent=metric_exponent,
        eigenvalues=evals,
    )
