"""Permutation arithmetic, Kendall tau distance, and coordinate embeddings.

Permutations are one-line notation over 0-based dense items: ``p[k]`` is the
item placed at position ``k``, and every item of ``{0, ..., rho-1}`` appears
exactly once. All functions accept any integer sequence and return numpy
arrays.

Pair coordinates are indexed lexicographically over item pairs (i, j) with
i < j; every module in the package shares this ordering, so coordinate k of
one labeler's embedding always refers to the same item pair as coordinate k
of another's.
"""

from itertools import permutations as _permutations

import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "identity",
    "check_permutation",
    "kendall_tau",
    "kendall_tau_many",
    "pair_sign_embed",
    "pair_sign_embed_many",
    "pair_indices",
    "inversion_vector",
    "l1_inversion_distance",
    "invert",
    "compose",
    "all_permutations",
    "perm_to_str",
    "perm_from_str",
    "num_pairs",
]


def identity(rho):
    """Identity permutation on ``rho`` items."""
    if rho < 1:
        raise InvalidArgumentError(f"need rho >= 1, got {rho}")
    return np.arange(rho, dtype=np.int64)


def check_permutation(p):
    """Validate and return ``p`` as an int64 array in one-line notation."""
    p = np.asarray(p, dtype=np.int64)
    if p.ndim != 1 or p.size < 1:
        raise InvalidArgumentError(f"permutation must be a nonempty 1-d sequence, got shape {p.shape}")
    seen = np.zeros(p.size, dtype=bool)
    if p.min() < 0 or p.max() >= p.size:
        raise InvalidArgumentError(f"entries must cover 0..{p.size - 1}: {p.tolist()}")
    seen[p] = True
    if not seen.all():
        raise InvalidArgumentError(f"not a bijection on 0..{p.size - 1}: {p.tolist()}")
    return p


def num_pairs(rho):
    """Number of item pairs C(rho, 2)."""
    return rho * (rho - 1) // 2


def pair_indices(rho):
    """Lexicographic (i, j) pair index arrays, i < j, shared by all embeddings."""
    return np.triu_indices(rho, k=1)


def _merge_count(seq):
    # merge-sort inversion counting, O(rho log rho)
    n = len(seq)
    if n <= 1:
        return seq, 0
    mid = n // 2
    left, a = _merge_count(seq[:mid])
    right, b = _merge_count(seq[mid:])
    merged = []
    count = a + b
    i = j = 0
    nl = len(left)
    while i < nl and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            merged.append(right[j])
            count += nl - i
            j += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    return merged, count


def kendall_tau(a, b):
    """Kendall tau distance: number of item pairs ordered differently by a and b.

    Parameters
    ----------
    a, b : sequences of equal length rho
        Permutations in one-line notation.

    Returns
    -------
    int
        Count in ``0 .. C(rho, 2)``. Symmetric in its arguments.
    """
    a = check_permutation(a)
    b = check_permutation(b)
    if a.size != b.size:
        raise InvalidArgumentError(f"length mismatch: {a.size} vs {b.size}")
    # positions in b of the items in a's order; its inversions are the discordant pairs
    relabeled = invert(b)[a]
    _, count = _merge_count(relabeled.tolist())
    return count


def kendall_tau_many(A, B):
    """Row-wise Kendall tau distances between two (n, rho) permutation arrays.

    Uses the pair-sign identity ``sum_i g(a)_i g(b)_i = C(rho,2) - 2 d_tau``,
    which vectorizes across rows.
    """
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    if A.shape != B.shape:
        raise InvalidArgumentError(f"shape mismatch: {A.shape} vs {B.shape}")
    ga = pair_sign_embed_many(A)
    gb = pair_sign_embed_many(B)
    c2 = num_pairs(A.shape[-1])
    return (c2 - (ga * gb).sum(axis=-1)) // 2


def pair_sign_embed(p):
    """Embed a permutation as the +-1 vector of its pairwise item orders.

    Entry k, for the k-th lexicographic pair (i, j) with i < j, is +1 when
    i precedes j in ``p`` and -1 otherwise. The map is injective on S_rho.
    """
    p = check_permutation(p)
    if p.size < 2:
        raise InvalidArgumentError("pair-sign embedding needs rho >= 2")
    return pair_sign_embed_many(p[None, :])[0]


def pair_sign_embed_many(P):
    """Vectorized :func:`pair_sign_embed` over an (..., rho) array of permutations."""
    P = np.asarray(P, dtype=np.int64)
    rho = P.shape[-1]
    if rho < 2:
        raise InvalidArgumentError("pair-sign embedding needs rho >= 2")
    pos = np.argsort(P, axis=-1)
    iu, ju = pair_indices(rho)
    return np.where(pos[..., iu] < pos[..., ju], 1, -1).astype(np.int64)


def inversion_vector(p):
    """Inversion table of ``p``: entry b-1 counts items a < b placed after b.

    The entries x(b) for b = 1..rho-1 satisfy 0 <= x(b) <= b, and their sum
    equals the Kendall tau distance from the identity (the embedding is
    weight preserving for the l1 norm).
    """
    p = check_permutation(p)
    pos = invert(p)
    rho = p.size
    x = np.empty(max(rho - 1, 0), dtype=np.int64)
    for b in range(1, rho):
        x[b - 1] = int(np.count_nonzero(pos[:b] > pos[b]))
    return x


def l1_inversion_distance(a, b):
    """l1 distance between two inversion vectors of equal length."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"length mismatch: {a.shape} vs {b.shape}")
    return int(np.abs(a - b).sum())


def invert(p):
    """Group inverse: position of each item, so that ``compose(p, invert(p))`` is the identity."""
    p = check_permutation(p)
    inv = np.empty_like(p)
    inv[p] = np.arange(p.size, dtype=np.int64)
    return inv


def compose(a, b):
    """Composition ``(a o b)[k] = a[b[k]]``."""
    a = check_permutation(a)
    b = check_permutation(b)
    if a.size != b.size:
        raise InvalidArgumentError(f"length mismatch: {a.size} vs {b.size}")
    return a[b]


def all_permutations(rho):
    """All of S_rho as an (rho!, rho) array in lexicographic order."""
    if rho < 1:
        raise InvalidArgumentError(f"need rho >= 1, got {rho}")
    return np.array(list(_permutations(range(rho))), dtype=np.int64)


def perm_to_str(p):
    """Serialize as comma-separated 0-based indices, e.g. ``"2,0,1"``."""
    return ",".join(str(int(v)) for v in check_permutation(p))


def perm_from_str(s):
    """Parse the :func:`perm_to_str` format."""
    try:
        vals = [int(tok) for tok in s.split(",")]
    except ValueError as exc:
        raise InvalidArgumentError(f"bad permutation string {s!r}") from exc
    return check_permutation(vals)
