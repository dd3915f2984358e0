"""Learning labeler accuracies without ground truth.

Given only the m labelers' outputs over n tasks, the estimators here recover
each labeler's mean parameter (its expected agreement with the latent truth)
from observable pairwise statistics, using triples of mutually conditionally
independent labelers. Three routes are provided:

- continuous: closed-form square-root solution on real-valued (or +-1)
  coordinates, needs the truth's per-coordinate second moment;
- hypercube (quadratic): per-coordinate conditional probabilities under a
  two-point prior, solved by the quadratic formula;
- isotropic: half-sum of pairwise expected distances, needing only the native
  metric.

:func:`learn_label_model` wires a route end to end for rankings, real vectors,
and finite metric spaces, maps mean parameters to canonical accuracies
(numerical inversion of the Mallows expected distance for rankings, inverse
covariance for the Gaussian-style spaces), and returns a serializable model.
"""

from dataclasses import dataclass, field

import numpy as np

from . import mallows
from ._covariance import repair_covariance
from .errors import (
    ConfigurationError,
    DegenerateMomentError,
    DomainError,
    InconsistentMomentsError,
    InvalidArgumentError,
    SignAmbiguousError,
)
from .metric_spaces import FiniteMetricSpace, classical_mds
from .permutations import num_pairs, pair_sign_embed_many

__all__ = [
    "EPS_FLOOR",
    "LabelingMatrix",
    "CorrelationSet",
    "TwoPointPrior",
    "SecondMomentPrior",
    "AccuracyEstimates",
    "LabelModel",
    "empirical_pair_moments",
    "continuous_triplets",
    "quadratic_triplets",
    "isotropic_accuracies",
    "resolve_signs",
    "gaussian_backward_map",
    "learn_label_model",
]

# below this, a pairwise moment is treated as indistinguishable from zero
EPS_FLOOR = 1e-6

RANKING = "ranking"
REAL_VECTOR = "real_vector"
FINITE_METRIC = "finite_metric"

_PATHS = {
    RANKING: ("continuous", "hypercube", "isotropic"),
    REAL_VECTOR: ("continuous", "isotropic"),
    FINITE_METRIC: ("isotropic", "continuous"),
}


@dataclass(frozen=True)
class LabelingMatrix:
    """Outputs of m labelers over n tasks in one label space.

    labels layout by space kind:
      ranking       (n, m, rho) int permutations
      real_vector   (n, m, d) floats
      finite_metric (n, m) int point indices, with ``space`` attached
    """

    space_kind: str
    labels: np.ndarray
    space: FiniteMetricSpace = None

    def __post_init__(self):
        if self.space_kind not in _PATHS:
            raise InvalidArgumentError(f"unknown space kind {self.space_kind!r}")
        labels = np.asarray(self.labels)
        if self.space_kind == RANKING:
            labels = labels.astype(np.int64)
            if labels.ndim != 3:
                raise InvalidArgumentError(f"ranking labels must be (n, m, rho), got {labels.shape}")
            rho = labels.shape[2]
            if not (np.sort(labels, axis=2) == np.arange(rho)).all():
                raise InvalidArgumentError("every ranking entry must be a permutation of 0..rho-1")
        elif self.space_kind == REAL_VECTOR:
            labels = labels.astype(np.float64)
            if labels.ndim == 2:
                labels = labels[:, :, None]
            if labels.ndim != 3:
                raise InvalidArgumentError(f"real labels must be (n, m) or (n, m, d), got {labels.shape}")
            if not np.isfinite(labels).all():
                raise InvalidArgumentError("real labels must be finite")
        else:
            labels = labels.astype(np.int64)
            if labels.ndim != 2:
                raise InvalidArgumentError(f"node labels must be (n, m), got {labels.shape}")
            if self.space is None:
                raise InvalidArgumentError("finite_metric labels need an attached space")
            if labels.min(initial=0) < 0 or labels.max(initial=0) >= self.space.size:
                raise InvalidArgumentError("node labels outside the space")
        if labels.shape[0] < 1 or labels.shape[1] < 1:
            raise InvalidArgumentError(f"need n >= 1 and m >= 1, got shape {labels.shape}")
        object.__setattr__(self, "labels", labels)

    @property
    def n_tasks(self):
        return int(self.labels.shape[0])

    @property
    def n_lfs(self):
        return int(self.labels.shape[1])

    @property
    def rho(self):
        if self.space_kind != RANKING:
            raise InvalidArgumentError("rho only defined for ranking matrices")
        return int(self.labels.shape[2])

    @property
    def dim(self):
        if self.space_kind != REAL_VECTOR:
            raise InvalidArgumentError("dim only defined for real_vector matrices")
        return int(self.labels.shape[2])


@dataclass(frozen=True)
class CorrelationSet:
    """Unordered labeler pairs declared conditionally dependent."""

    edges: frozenset = frozenset()

    @classmethod
    def from_pairs(cls, pairs):
        norm = set()
        for a, b in pairs:
            a, b = int(a), int(b)
            if a == b:
                raise InvalidArgumentError(f"self-loop ({a}, {b}) not allowed")
            norm.add((min(a, b), max(a, b)))
        return cls(frozenset(norm))

    def correlated(self, a, b):
        return (min(a, b), max(a, b)) in self.edges


@dataclass(frozen=True)
class TwoPointPrior:
    """Truth takes one of two values; p is the probability of the first."""

    p: float

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise InvalidArgumentError(f"need 0 < p < 1, got {self.p}")


@dataclass(frozen=True)
class SecondMomentPrior:
    """Per-coordinate second moments E[g(Y)_i^2] of the embedded truth."""

    second_moments: np.ndarray

    def __post_init__(self):
        sm = np.atleast_1d(np.asarray(self.second_moments, dtype=np.float64))
        if (sm <= 0).any():
            raise InvalidArgumentError("second moments must be positive")
        object.__setattr__(self, "second_moments", sm)


@dataclass(frozen=True)
class AccuracyEstimates:
    """Raw per-coordinate accuracy estimates, before any inference-time clamping.

    kind is "signed_moment" (E[g(lambda)_i g(y)_i], continuous route) or
    "conditional_probability" (P(g(lambda)_i = 1 | y), hypercube route).
    """

    kind: str
    per_coordinate: np.ndarray
    expected_distance: np.ndarray


@dataclass(frozen=True)
class LabelModel:
    """Learned per-labeler canonical accuracies plus the moments behind them.

    ``expected_distances`` holds the raw (unclamped) mean-parameter estimates;
    clamping happens only where a consumer requires it. ``theta_matrix`` is
    the full inverse covariance on the Gaussian-style routes, whose diagonal
    supplies ``thetas``.
    """

    space_kind: str
    path: str
    dims: dict
    thetas: np.ndarray
    expected_distances: np.ndarray
    accuracies: np.ndarray
    pairwise_moments: np.ndarray
    embedding: dict
    version: str
    theta_matrix: np.ndarray = None
    estimates: AccuracyEstimates = field(default=None, repr=False, compare=False)

    @property
    def n_lfs(self):
        return int(len(self.thetas))


def empirical_pair_moments(values):
    """Per-pair, per-coordinate product moments of embedded labeler outputs.

    Parameters
    ----------
    values : (m, n, d) array
        Embedded outputs, labeler-major.

    Returns
    -------
    (m, m, d) array
        ``e[a, b, i] = mean_t values[a, t, i] * values[b, t, i]``; symmetric
        in (a, b), diagonal holds the per-labeler second moments.
    """
    values = np.asarray(values)
    if values.ndim != 3 or values.shape[1] < 1:
        raise InvalidArgumentError(f"values must be a nonempty (m, n, d) array, got {values.shape}")
    m, n, d = values.shape
    out = np.empty((m, m, d), dtype=np.float64)
    for a in range(m):
        va = values[a].astype(np.float64, copy=False)
        for b in range(a, m):
            e = (va * values[b]).mean(axis=0)
            out[a, b] = e
            out[b, a] = e
    return out


def continuous_triplets(e_ab, e_ac, e_bc, second_moment, eps_floor=EPS_FLOOR):
    """Accuracy magnitudes of three mutually conditionally independent labelers.

    Under conditional independence the cross moments factor as
    ``e_ab = a_a a_b / E[Y^2]``, so each magnitude has the closed form
    ``|a_a| = sqrt(|e_ab| |e_ac| E[Y^2] / |e_bc|)``. Inputs may be scalars or
    same-shape arrays (one entry per coordinate).

    Raises
    ------
    DegenerateMomentError
        If any ``|e|`` is at or below ``eps_floor``: that labeler pair is
        indistinguishable from independence at this sample size.
    """
    e_ab, e_ac, e_bc = (np.abs(np.asarray(x, dtype=np.float64)) for x in (e_ab, e_ac, e_bc))
    sm = np.asarray(second_moment, dtype=np.float64)
    if (sm <= 0).any():
        raise DomainError("second moment must be positive")
    if min(e_ab.min(), e_ac.min(), e_bc.min()) <= eps_floor:
        raise DegenerateMomentError(f"pairwise moment at or below the floor {eps_floor}")
    mag_a = np.sqrt(e_ab * e_ac * sm / e_bc)
    mag_b = np.sqrt(e_ab * e_bc * sm / e_ac)
    mag_c = np.sqrt(e_ac * e_bc * sm / e_ab)
    return mag_a, mag_b, mag_c


def quadratic_triplets(o_ab, o_ac, o_bc, l_a, l_b, l_c, p):
    """Per-coordinate conditional probabilities from joint +1 frequencies.

    Solves the conditional-independence system relating the pairwise joint
    probabilities ``o_xy = P(g_x = 1, g_y = 1)`` and marginals
    ``l_x = P(g_x = 1)`` to the class-conditionals
    ``alpha = P(g_a = 1 | Y = y1)`` (and beta, gamma alike) under a two-point
    prior with ``p = P(Y = y1)``. The middle labeler b is the quadratic's
    pivot; the two roots always sum to ``2 l_b``, and the root ``>= l_b``
    (the better-than-random direction for a +1-coded center) is returned.
    a and c follow from linear relations in the selected root. Inputs may be
    scalars or same-shape arrays.

    On population-exact inputs the generating probabilities are recovered
    exactly. Roots are reported raw (possibly outside [0, 1] on noisy input);
    clamping is an inference-time policy.

    Raises
    ------
    InconsistentMomentsError
        Discriminant below the relative tolerance: no real solution exists.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"need 0 < p < 1, got {p}")
    o_ab, o_ac, o_bc, l_a, l_b, l_c = arrays = [
        np.asarray(x, dtype=np.float64) for x in (o_ab, o_ac, o_bc, l_a, l_b, l_c)
    ]
    for x in arrays:
        if ((x < -1e-12) | (x > 1 + 1e-12)).any():
            raise InvalidArgumentError("probabilities must lie in [0, 1]")
    r = p / (1.0 - p)
    t = p / (1.0 - p) ** 2
    q_a, q_b, q_c = l_a / (1.0 - p), l_b / (1.0 - p), l_c / (1.0 - p)
    op_ab, op_ac, op_bc = o_ab / (1.0 - p), o_ac / (1.0 - p), o_bc / (1.0 - p)
    k_ab = op_ab - q_a * q_b
    k_bc = op_bc - q_b * q_c
    # quadratic A beta^2 + B beta + C = 0 in the pivot; B = -(2 q_b r / t) A holds
    # identically, so the roots are l_b +- sqrt(disc) / (2|A|)
    lead = t * (q_a * q_c * r - op_ac * t)
    const = (
        t * k_ab * k_bc
        + q_a * q_c * q_b**2 * r**2
        + q_a * q_b * r**2 * k_bc
        + q_b * q_c * r**2 * k_ab
        - op_ac * q_b**2 * r**2
    )
    lin = -2.0 * q_b * r / t * lead
    disc = lin**2 - 4.0 * lead * const
    # near the double root a sampled discriminant is legitimately negative at
    # the scale of its own components; only a violation of at least half the
    # total component magnitude is evidence of jointly impossible moments
    tol = 0.5 * (lin**2 + np.abs(4.0 * lead * const)) + 1e-9
    if (disc < -tol).any():
        raise InconsistentMomentsError("moments admit no real solution (negative discriminant)")
    disc = np.clip(disc, 0.0, None)

    lead_scale = t**2 * (q_a * q_c + op_ac) + 1e-30
    degenerate_lead = np.abs(lead) <= 1e-12 * lead_scale
    safe_lead = np.where(degenerate_lead, 1.0, lead)
    # a vanishing lead means the outer pair's joint factorizes: the linear
    # coefficient vanishes with it (lin = -2 l_b lead identically), the pivot
    # is underdetermined, and its marginal is the only neutral answer
    beta = np.where(degenerate_lead, l_b, l_b + np.sqrt(disc) / (2.0 * np.abs(safe_lead)))

    denom = t * beta - q_b * r
    safe_denom = np.where(np.abs(denom) <= 1e-30, 1.0, denom)
    alpha = np.where(
        np.abs(denom) <= 1e-30, l_a, (op_ab + q_a * r * beta - q_a * q_b) / safe_denom
    )
    gamma = np.where(
        np.abs(denom) <= 1e-30, l_c, (op_bc + q_c * r * beta - q_b * q_c) / safe_denom
    )
    if alpha.ndim == 0:
        return float(alpha), float(beta), float(gamma)
    return alpha, beta, gamma


def isotropic_accuracies(pair_distances, triplet):
    """Expected distance to the latent truth from three pairwise expected distances.

    When pairwise expected distances are additive over the truth
    (conditional independence), ``E[d(a, y)]`` equals
    ``(E[d(a,b)] + E[d(a,c)] - E[d(b,c)]) / 2``. The half-sum is returned
    as-is; it can be negative on noisy input, and the caller owns clamping.
    """
    d = np.asarray(pair_distances, dtype=np.float64)
    a, b, c = triplet
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise InvalidArgumentError(f"pair distances must be a square matrix, got {d.shape}")
    m = d.shape[0]
    if len({a, b, c}) != 3 or not all(0 <= x < m for x in (a, b, c)):
        raise InvalidArgumentError(f"bad triplet {triplet} for m={m}")
    vals = d[a, b], d[a, c], d[b, c]
    if any(np.isnan(v) for v in vals):
        raise InvalidArgumentError(f"missing pairwise distance among {triplet}")
    return 0.5 * (vals[0] + vals[1] - vals[2])


def resolve_signs(magnitudes, pair_moments, anchor=None, eps_floor=EPS_FLOOR):
    """Assign signs to accuracy magnitudes from pairwise moment signs.

    Signs propagate along pairs whose moment magnitude exceeds ``eps_floor``:
    ``sign(a_b) = sign(e_{parent,b}) * sign(a_parent)``, starting from
    ``anchor`` (known positive) or labeler 0. Without an anchor the global
    orientation is fixed by the better-than-random-on-average convention,
    flipping everything if the signed sum comes out negative.

    Raises
    ------
    SignAmbiguousError
        If some labeler cannot be reached through usable pair moments.
    """
    mags = np.asarray(magnitudes, dtype=np.float64)
    e = np.asarray(pair_moments, dtype=np.float64)
    m = mags.shape[0]
    if e.shape != (m, m):
        raise InvalidArgumentError(f"pair moments must be ({m}, {m}), got {e.shape}")
    signs = np.zeros(m)
    root = 0 if anchor is None else int(anchor)
    if not 0 <= root < m:
        raise InvalidArgumentError(f"anchor {root} outside 0..{m - 1}")
    signs[root] = 1.0
    frontier = [root]
    while frontier:
        nxt = []
        for u in frontier:
            for v in range(m):
                if signs[v] == 0.0 and abs(e[u, v]) > eps_floor:
                    signs[v] = signs[u] * np.sign(e[u, v])
                    nxt.append(v)
        frontier = nxt
    if (signs == 0.0).any():
        missing = np.flatnonzero(signs == 0.0).tolist()
        raise SignAmbiguousError(
            f"cannot reach labelers {missing}: all their pair moments are below {eps_floor}"
        )
    if anchor is None and float(signs @ mags) < 0.0:
        signs = -signs
    return signs * mags


def gaussian_backward_map(error_cov):
    """Canonical accuracy matrix of a Gaussian model: the inverse error covariance.

    ``error_cov[a, b] = E[(lambda^a - y)(lambda^b - y)]``; the matrix is
    ridge-repaired once if needed. The diagonal of the result is the per-LF
    canonical accuracy.
    """
    cov = repair_covariance(error_cov)
    return np.linalg.inv(cov)


def _iter_triplets(m, corr, a):
    for b in range(m):
        if b == a or corr.correlated(a, b):
            continue
        for c in range(b + 1, m):
            if c == a or corr.correlated(a, c) or corr.correlated(b, c):
                continue
            yield b, c


def _pick_triplets(m, corr, a, policy):
    triplets = list(_iter_triplets(m, corr, a))
    if not triplets:
        raise ConfigurationError(f"triplet unavailable for labeler {a}")
    if policy == "first":
        return triplets[:1]
    if policy == "median":
        return triplets
    raise ConfigurationError(f"unknown triplet policy {policy!r}")


def _continuous_magnitudes(e, corr, second_moments, policy):
    """Per-coordinate accuracy magnitudes, one row per labeler."""
    m, _, d = e.shape
    out = np.empty((m, d))
    for a in range(m):
        cands = []
        errors = []
        for b, c in _pick_triplets(m, corr, a, policy):
            try:
                mag, _, _ = continuous_triplets(e[a, b], e[a, c], e[b, c], second_moments)
            except DegenerateMomentError as exc:
                errors.append(exc)
                continue
            cands.append(mag)
        if not cands:
            raise errors[0]
        out[a] = cands[0] if len(cands) == 1 else np.median(np.stack(cands), axis=0)
    return out


def _resolve_signs_per_coordinate(mags, e, anchor):
    m, d = mags.shape
    signed = np.empty_like(mags)
    for i in range(d):
        signed[:, i] = resolve_signs(mags[:, i], e[:, :, i], anchor=anchor)
    return signed


def _hypercube_agreements(values, corr, p, policy):
    """Per-coordinate probability of agreeing with the latent truth, per labeler.

    Runs the quadratic route once per truth value: the +1-coded run uses the
    raw joint frequencies with weight p, the -1-coded run uses the
    sign-flipped frequencies with weight 1-p.
    """
    m, n, d = values.shape
    pos = (values > 0).astype(np.float64)
    agreements = np.zeros((m, d))
    for coded, weight in ((pos, p), (1.0 - pos, 1.0 - p)):
        l = coded.mean(axis=1)  # (m, d)
        o = np.empty((m, m, d))
        for a in range(m):
            for b in range(a, m):
                v = (coded[a] * coded[b]).mean(axis=0)
                o[a, b] = o[b, a] = v
        cond = np.empty((m, d))
        for a in range(m):
            cands = []
            errors = []
            for b, c in _pick_triplets(m, corr, a, policy):
                try:
                    # pivot the quadratic on the target labeler a
                    _, piv, _ = quadratic_triplets(
                        o[b, a], o[b, c], o[a, c], l[b], l[a], l[c], weight
                    )
                except InconsistentMomentsError as exc:
                    errors.append(exc)
                    continue
                cands.append(piv)
            if not cands:
                raise errors[0]
            cond[a] = cands[0] if len(cands) == 1 else np.median(np.stack(cands), axis=0)
        agreements += weight * cond
    return agreements


def _ranking_theta(mean_distance, rho):
    """Mallows canonical accuracy with the boundary clamping policy.

    Raw means at or below 0 clamp to the top of the bisection bracket
    (a labeler indistinguishable from perfect); means at or beyond the
    uniform value clamp to 0 (no better than random).
    """
    if mean_distance >= mallows.uniform_mean_distance(rho):
        return 0.0
    if mean_distance <= 0.0:
        return mallows.BACKWARD_BRACKET[1]
    return mallows.backward_map(mean_distance, rho)


def _default_path(space_kind):
    return {RANKING: "continuous", REAL_VECTOR: "continuous", FINITE_METRIC: "isotropic"}[space_kind]


def _check_triplet_availability(m, corr):
    if m < 3:
        raise ConfigurationError(f"triplet unavailable: need at least 3 labelers, got {m}")
    for a in range(m):
        if next(_iter_triplets(m, corr, a), None) is None:
            raise ConfigurationError(f"triplet unavailable for labeler {a} under the correlation set")


def learn_label_model(data, corr=None, prior=None, path=None, triplet_policy="first", anchor=None,
                      mds_dim=None):
    """Learn per-labeler canonical accuracies from outputs alone.

    Parameters
    ----------
    data : LabelingMatrix
    corr : CorrelationSet, optional
        Labeler pairs that may not appear together in a triplet.
    prior : TwoPointPrior or SecondMomentPrior, optional
        Rankings default to the uniform-truth values (second moments 1 on the
        continuous route, p = 1/2 on the hypercube route). The continuous
        route on real vectors requires a SecondMomentPrior.
    path : {"continuous", "hypercube", "isotropic"}, optional
        Defaults per space: continuous for rankings and real vectors,
        isotropic for finite metric spaces.
    triplet_policy : {"first", "median"}
        "first" uses the lexicographically smallest admissible (b, c) per
        labeler; "median" takes the median estimate over all admissible pairs.
    anchor : int, optional
        Labeler index known to be better than random, used to root sign
        propagation.
    mds_dim : int, optional
        Embedding dimension for the continuous route on finite metric spaces.

    Returns
    -------
    LabelModel
    """
    from . import __version__

    corr = corr or CorrelationSet()
    m = data.n_lfs
    _check_triplet_availability(m, corr)
    kind = data.space_kind
    path = path or _default_path(kind)
    if path not in _PATHS[kind]:
        raise ConfigurationError(f"path {path!r} not available for {kind!r} labels")

    if kind == RANKING:
        return _learn_ranking(data, corr, prior, path, triplet_policy, anchor, __version__)
    if kind == REAL_VECTOR:
        return _learn_real(data, corr, prior, path, triplet_policy, anchor, __version__)
    return _learn_finite(data, corr, prior, path, triplet_policy, anchor, mds_dim, __version__)


def _learn_ranking(data, corr, prior, path, policy, anchor, version):
    rho = data.rho
    d = num_pairs(rho)
    values = np.ascontiguousarray(
        pair_sign_embed_many(data.labels).transpose(1, 0, 2)
    ).astype(np.int8)  # (m, n, d)
    embedding = {"kind": "pair_sign", "dim": d, "pair_order": "lexicographic"}
    e = empirical_pair_moments(values)

    if path == "isotropic":
        # native Kendall distances through the embedding identity
        pair_dist = d * (1.0 - e.mean(axis=2)) / 2.0
        np.fill_diagonal(pair_dist, 0.0)
        mean_dist = _isotropic_means(pair_dist, corr, policy)
        acc = 1.0 - 2.0 * mean_dist / d
        estimates = AccuracyEstimates("signed_moment", None, mean_dist)
        embedding = {"kind": "native_kendall", "rho": rho}
    elif path == "continuous":
        mags = _continuous_magnitudes(e, corr, np.ones(d), policy)
        per_coord = _resolve_signs_per_coordinate(mags, e, anchor)
        mean_dist = ((1.0 - per_coord) / 2.0).sum(axis=1)
        acc = per_coord.mean(axis=1)
        estimates = AccuracyEstimates("signed_moment", per_coord, mean_dist)
    else:  # hypercube
        p = prior.p if isinstance(prior, TwoPointPrior) else 0.5
        agreements = _hypercube_agreements(values, corr, p, policy)
        mean_dist = (1.0 - agreements).sum(axis=1)
        acc = (2.0 * agreements - 1.0).mean(axis=1)
        estimates = AccuracyEstimates("conditional_probability", agreements, mean_dist)

    thetas = np.array([_ranking_theta(v, rho) for v in mean_dist])
    return LabelModel(
        space_kind=RANKING,
        path=path,
        dims={"rho": rho},
        thetas=thetas,
        expected_distances=mean_dist,
        accuracies=acc,
        pairwise_moments=e.mean(axis=2),
        embedding=embedding,
        version=version,
        estimates=estimates,
    )


def _isotropic_means(pair_dist, corr, policy):
    m = pair_dist.shape[0]
    out = np.empty(m)
    for a in range(m):
        vals = [isotropic_accuracies(pair_dist, (a, b, c)) for b, c in _pick_triplets(m, corr, a, policy)]
        out[a] = vals[0] if len(vals) == 1 else float(np.median(vals))
    return out


def _learn_real(data, corr, prior, path, policy, anchor, version):
    values = np.ascontiguousarray(data.labels.transpose(1, 0, 2))  # (m, n, d)
    m, n, d = values.shape
    e = empirical_pair_moments(values)
    second_moments = None
    if isinstance(prior, SecondMomentPrior):
        second_moments = np.broadcast_to(prior.second_moments, (d,)).astype(np.float64)

    if path == "continuous":
        if second_moments is None:
            raise ConfigurationError("continuous path on real labels needs a SecondMomentPrior")
        mags = _continuous_magnitudes(e, corr, second_moments, policy)
        per_coord = _resolve_signs_per_coordinate(mags, e, anchor)
        acc = per_coord.sum(axis=1)  # E[<lambda_a, y>]
        # error covariance from raw moments and accuracies
        ete = e.sum(axis=2)
        err_cov = ete - acc[:, None] - acc[None, :] + second_moments.sum()
        mean_dist = np.diag(err_cov).copy()
        estimates = AccuracyEstimates("signed_moment", per_coord, mean_dist)
        pairwise = ete
    else:  # isotropic
        diffs = values[:, None, :, :] - values[None, :, :, :]  # (m, m, n, d)
        pair_dist = (diffs**2).sum(axis=3).mean(axis=2)
        mean_dist = _isotropic_means(pair_dist, corr, policy)
        err_cov = 0.5 * (mean_dist[:, None] + mean_dist[None, :] - pair_dist)
        np.fill_diagonal(err_cov, mean_dist)
        per_coord = None
        acc = np.full(m, np.nan)
        if second_moments is not None:
            # polarization against the prior second moment recovers E[<lambda_a, y>]
            acc = 0.5 * (np.einsum("and,and->a", values, values) / n + second_moments.sum() - mean_dist)
        estimates = AccuracyEstimates("signed_moment", None, mean_dist)
        pairwise = e.sum(axis=2)

    theta_matrix = gaussian_backward_map(err_cov)
    return LabelModel(
        space_kind=REAL_VECTOR,
        path=path,
        dims={"d": d},
        thetas=np.diag(theta_matrix).copy(),
        expected_distances=mean_dist,
        accuracies=acc,
        pairwise_moments=pairwise,
        embedding={"kind": "identity", "dim": d},
        version=version,
        theta_matrix=theta_matrix,
        estimates=estimates,
    )


def _learn_finite(data, corr, prior, path, policy, anchor, mds_dim, version):
    space = data.space
    labels = data.labels  # (n, m)
    m = data.n_lfs
    n = data.n_tasks

    if path == "isotropic":
        pair_dist = np.empty((m, m))
        for a in range(m):
            for b in range(a, m):
                v = space.dist[labels[:, a], labels[:, b]].mean()
                pair_dist[a, b] = pair_dist[b, a] = v
        np.fill_diagonal(pair_dist, 0.0)
        mean_dist = _isotropic_means(pair_dist, corr, policy)
        floor = 1e-9 * max(1.0, float(space.dist.mean()))
        thetas = 1.0 / np.clip(mean_dist, floor, None)
        estimates = AccuracyEstimates("signed_moment", None, mean_dist)
        return LabelModel(
            space_kind=FINITE_METRIC,
            path=path,
            dims={"n_points": space.size},
            thetas=thetas,
            expected_distances=mean_dist,
            accuracies=np.full(m, np.nan),
            pairwise_moments=pair_dist,
            embedding={"kind": "native_distance", "n_points": space.size},
            version=version,
            estimates=estimates,
        )

    # continuous route: embed points by MDS, treat coordinates as Gaussian
    dim = mds_dim or min(space.size - 1, 8)
    report = classical_mds(space, dim=dim)
    coords = report.coords
    values = np.ascontiguousarray(coords[labels].transpose(1, 0, 2))  # (m, n, dim)
    e = empirical_pair_moments(values)
    # uniform prior over points fixes the truth's per-coordinate second moments
    second_moments = (coords**2).mean(axis=0)
    if isinstance(prior, SecondMomentPrior):
        second_moments = np.broadcast_to(prior.second_moments, (dim,)).astype(np.float64)
    mags = _continuous_magnitudes(e, corr, second_moments, policy)
    per_coord = _resolve_signs_per_coordinate(mags, e, anchor)
    acc = per_coord.sum(axis=1)
    mean_dist = np.einsum("and,and->a", values, values) / n - 2.0 * acc + second_moments.sum()
    floor = 1e-9 * max(1.0, float(second_moments.sum()))
    thetas = 1.0 / np.clip(mean_dist, floor, None)
    return LabelModel(
        space_kind=FINITE_METRIC,
        path="continuous",
        dims={"n_points": space.size},
        thetas=thetas,
        expected_distances=mean_dist,
        accuracies=acc,
        pairwise_moments=e.sum(axis=2),
        embedding={
            "kind": "mds",
            "dim": dim,
            "epsilon": report.epsilon,
            "scale": report.scale,
            "exponent": report.exponent,
        },
        version=version,
        estimates=AccuracyEstimates("signed_moment", per_coord, mean_dist),
    )
