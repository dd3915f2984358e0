"""Synthetic tasks and heterogeneous labelers for rankings, regression, and graphs.

Reproducibility scheme: every scenario carries one integer seed, and each
random decision draws from a named Philox substream
``Generator(Philox(SeedSequence(entropy=seed, spawn_key=path)))`` where the
path encodes what the stream is for:

    (0, attempt)      graph structure (resampled on connectivity rejection)
    (1, task)         the task's latent truth
    (2, task, a)      labeler a's output on the task
    (3,)              preset parameter draws (labeler quality vectors)

Per-task, per-labeler substreams make the output independent of any parallel
generation schedule and bitwise reproducible from the seed alone.
"""

from dataclasses import dataclass

import numpy as np

from . import mallows
from .errors import DisconnectedGraphError, GenerationError, InvalidArgumentError
from .label_model import FINITE_METRIC, RANKING, REAL_VECTOR, LabelingMatrix
from .metric_spaces import FiniteMetricSpace, graph_hop_metric

__all__ = [
    "RankingScenario",
    "RegressionScenario",
    "GraphScenario",
    "heterogeneous_thetas",
    "movies_style_thetas",
    "gen_ranking_tasks",
    "gen_regression_tasks",
    "gen_graph_tasks",
    "two_point_population_moments",
    "gen_two_point_tasks",
    "substream",
]


def substream(seed, *path):
    """Deterministic named substream of the scenario seed (see module docstring)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=path)))


@dataclass(frozen=True)
class RankingScenario:
    """n tasks of uniform-random true rankings with per-labeler Mallows concentrations."""

    n: int
    rho: int
    thetas: tuple
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "thetas", tuple(float(t) for t in self.thetas))
        if self.n < 1 or self.rho < 2:
            raise InvalidArgumentError(f"need n >= 1 and rho >= 2, got n={self.n}, rho={self.rho}")
        if len(self.thetas) < 3:
            raise InvalidArgumentError(f"need at least 3 labelers, got {len(self.thetas)}")
        if any(t < 0 for t in self.thetas):
            raise InvalidArgumentError("thetas must be >= 0")


@dataclass(frozen=True)
class RegressionScenario:
    """Jointly Gaussian truth and labelers, specified by moments.

    ``accuracies`` is the truth-labeler covariance vector, ``lf_cov`` the
    labeler covariance matrix, ``prior_var`` the truth variance; the
    assembled joint covariance must be positive definite.
    """

    n: int
    accuracies: tuple
    lf_cov: tuple
    prior_var: float
    seed: int

    def __post_init__(self):
        acc = np.atleast_1d(np.asarray(self.accuracies, dtype=np.float64))
        cov = np.asarray(self.lf_cov, dtype=np.float64)
        if self.n < 1:
            raise InvalidArgumentError(f"need n >= 1, got {self.n}")
        m = acc.size
        if cov.shape != (m, m):
            raise InvalidArgumentError(f"lf_cov must be ({m}, {m}), got {cov.shape}")
        if self.prior_var <= 0:
            raise InvalidArgumentError("prior_var must be > 0")
        joint = self.joint_covariance(acc, cov, self.prior_var)
        try:
            np.linalg.cholesky(joint)
        except np.linalg.LinAlgError as exc:
            raise InvalidArgumentError("assembled joint covariance is not positive definite") from exc
        object.__setattr__(self, "accuracies", tuple(acc.tolist()))
        object.__setattr__(self, "lf_cov", tuple(map(tuple, cov.tolist())))

    @staticmethod
    def joint_covariance(acc, cov, prior_var):
        m = len(acc)
        joint = np.empty((m + 1, m + 1))
        joint[:m, :m] = cov
        joint[:m, m] = joint[m, :m] = acc
        joint[m, m] = prior_var
        return joint


@dataclass(frozen=True)
class GraphScenario:
    """Random connected graph with hop metric; labelers pick nodes near the truth."""

    n_nodes: int
    n_edges: int
    n: int
    thetas: tuple
    seed: int
    max_retries: int = 100

    def __post_init__(self):
        object.__setattr__(self, "thetas", tuple(float(t) for t in self.thetas))
        max_edges = self.n_nodes * (self.n_nodes - 1) // 2
        if self.n_nodes < 2 or not (self.n_nodes - 1 <= self.n_edges <= max_edges):
            raise InvalidArgumentError(
                f"need n_nodes >= 2 and n_nodes-1 <= n_edges <= {max_edges}, "
                f"got n_nodes={self.n_nodes}, n_edges={self.n_edges}"
            )
        if self.n < 1 or len(self.thetas) < 3:
            raise InvalidArgumentError("need n >= 1 and at least 3 labelers")
        if any(t < 0 for t in self.thetas):
            raise InvalidArgumentError("thetas must be >= 0")


def heterogeneous_thetas(seed, n_low=10, n_high=8):
    """Labeler concentrations with a strong quality split: n_low from U(0.1, 0.2), n_high from U(2, 5)."""
    rng = substream(seed, 3)
    low = rng.uniform(0.1, 0.2, size=n_low)
    high = rng.uniform(2.0, 5.0, size=n_high)
    return tuple(np.concatenate([low, high]).tolist())


def movies_style_thetas(m, seed):
    """One third of labelers from U(0.2, 1), the rest from U(0.001, 0.01)."""
    rng = substream(seed, 3)
    n_good = (m + 2) // 3
    good = rng.uniform(0.2, 1.0, size=n_good)
    bad = rng.uniform(0.001, 0.01, size=m - n_good)
    return tuple(np.concatenate([good, bad]).tolist())


def _mallows_draw(theta_cdfs, rho, truth, rng):
    u = rng.random(rho - 1)
    seq = [0]
    for j in range(1, rho):
        x = int(np.searchsorted(theta_cdfs[j - 1], u[j - 1]))
        seq.insert(j - x, j)
    return truth[np.array(seq)]


def gen_ranking_tasks(scenario):
    """Generate (truth, labels) for a ranking scenario.

    Truth rankings are uniform over S_rho per task; labeler a's output is a
    Mallows draw centered at the task's truth with concentration thetas[a].
    """
    n, rho = scenario.n, scenario.rho
    m = len(scenario.thetas)
    cdf_tables = [mallows._insertion_cdfs(t, rho) for t in scenario.thetas]
    truth = np.empty((n, rho), dtype=np.int64)
    labels = np.empty((n, m, rho), dtype=np.int64)
    for i in range(n):
        truth[i] = substream(scenario.seed, 1, i).permutation(rho)
        for a in range(m):
            labels[i, a] = _mallows_draw(cdf_tables[a], rho, truth[i], substream(scenario.seed, 2, i, a))
    return truth, LabelingMatrix(RANKING, labels)


def gen_regression_tasks(scenario):
    """Generate (truth, labels) for a Gaussian scenario.

    Truth is N(0, prior_var); labelers are drawn from the conditional law
    of the assembled joint Gaussian, so the empirical covariance converges
    to the scenario's moments.
    """
    acc = np.asarray(scenario.accuracies)
    cov = np.asarray(scenario.lf_cov)
    m = acc.size
    cond_mean_coef = acc / scenario.prior_var
    cond_cov = cov - np.outer(acc, acc) / scenario.prior_var
    chol = np.linalg.cholesky(cond_cov)
    truth = np.empty(scenario.n)
    labels = np.empty((scenario.n, m))
    sd = np.sqrt(scenario.prior_var)
    for i in range(scenario.n):
        y = sd * substream(scenario.seed, 1, i).standard_normal()
        truth[i] = y
        z = substream(scenario.seed, 2, i).standard_normal(m)
        labels[i] = cond_mean_coef * y + chol @ z
    return truth, LabelingMatrix(REAL_VECTOR, labels)


def _sample_graph(scenario):
    n_nodes, n_edges = scenario.n_nodes, scenario.n_edges
    all_pairs = [(u, v) for u in range(n_nodes) for v in range(u + 1, n_nodes)]
    for attempt in range(scenario.max_retries):
        rng = substream(scenario.seed, 0, attempt)
        chosen = rng.choice(len(all_pairs), size=n_edges, replace=False)
        edges = [all_pairs[k] for k in sorted(chosen.tolist())]
        try:
            return edges, graph_hop_metric(edges, n_nodes)
        except DisconnectedGraphError:
            continue
    raise GenerationError(f"no connected graph after {scenario.max_retries} attempts")


def gen_graph_tasks(scenario):
    """Generate (space, truth nodes, labels) for a graph scenario.

    The graph is uniform over simple connected graphs with the requested edge
    count (edge sets resampled until connected). Truth nodes are uniform;
    labeler a picks node v with probability proportional to
    exp(-thetas[a] * hops(v, truth)).
    """
    _, space = _sample_graph(scenario)
    m = len(scenario.thetas)
    n_nodes = scenario.n_nodes
    # per-labeler, per-center categorical CDFs over nodes
    cdfs = np.empty((m, n_nodes, n_nodes))
    for a, theta in enumerate(scenario.thetas):
        w = np.exp(-theta * space.dist)
        probs = w / w.sum(axis=0, keepdims=True)
        cdfs[a] = np.cumsum(probs, axis=0).T  # row y: cdf over nodes given center y
    truth = np.empty(scenario.n, dtype=np.int64)
    labels = np.empty((scenario.n, m), dtype=np.int64)
    for i in range(scenario.n):
        y = int(substream(scenario.seed, 1, i).integers(n_nodes))
        truth[i] = y
        for a in range(m):
            u = substream(scenario.seed, 2, i, a).random()
            labels[i, a] = int(np.searchsorted(cdfs[a, y], u))
    return space, truth, LabelingMatrix(FINITE_METRIC, labels, space=space)


def two_point_population_moments(cond_probs, p):
    """Population joint and marginal +1 frequencies of the two-point model.

    The model has two truth values with P(Y = y1) = p; labeler a shows +1
    with probability cond_probs[a] when Y = y1 and, by the pair-flip
    symmetry between the centers, with probability 1 - cond_probs[a] when
    Y = y2. Returns (O, l): O[a, b] = P(g_a = 1, g_b = 1) for a != b with
    P(g_a = 1) on the diagonal, and l = P(g = 1) per labeler.
    """
    cond = np.atleast_1d(np.asarray(cond_probs, dtype=np.float64))
    if not 0.0 < p < 1.0:
        raise InvalidArgumentError(f"need 0 < p < 1, got {p}")
    if ((cond < 0) | (cond > 1)).any():
        raise InvalidArgumentError("conditional probabilities must lie in [0, 1]")
    l = p * cond + (1.0 - p) * (1.0 - cond)
    o = p * np.outer(cond, cond) + (1.0 - p) * np.outer(1.0 - cond, 1.0 - cond)
    np.fill_diagonal(o, l)
    return o, l


def gen_two_point_tasks(cond_probs, p, n, d, seed):
    """Sample the two-point model of :func:`two_point_population_moments`.

    Returns (truth, values): truth in {+1, -1} with P(+1) = p, values a
    (n, m, d) array of +-1 coordinates, independent across coordinates given
    the truth.
    """
    cond = np.atleast_1d(np.asarray(cond_probs, dtype=np.float64))
    m = cond.size
    truth = np.where(substream(seed, 1).random(n) < p, 1, -1).astype(np.int64)
    show_plus = np.where(truth[:, None, None] > 0, cond[None, :, None], 1.0 - cond[None, :, None])
    values = np.where(substream(seed, 2).random((n, m, d)) < show_plus, 1, -1).astype(np.int8)
    return truth, values
