"""Sampling-graph generators and spectral audits of the biadjacency matrix."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import SampleSet, singular_values
from .errors import GenerationFailureError, InvalidArgumentError

__all__ = [
    "SpectrumReport",
    "BlockModelParams",
    "gen_random_d_regular",
    "gen_erdos_renyi",
    "trim",
    "gen_block_model",
    "spectrum",
]

REGULAR_SIGMA1_TOL = 1e-8


@dataclass(frozen=True)
class SpectrumReport:
    sigma1: float
    sigma2: float
    relative_gap: float
    measured_C: float
    is_row_regular: bool
    is_col_regular: bool
    d: int | None
    ramanujan: bool
    g1_residual: float
    n_edges: int


@dataclass(frozen=True)
class BlockModelParams:
    n1: int
    n2: int
    p: float
    q: float
    seed: int = 0

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise InvalidArgumentError("block model sides must be positive")
        for name in ("p", "q"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidArgumentError(f"{name}={v} must lie in [0, 1]")


def _rng(seed):
    return np.random.default_rng(seed)


def _repair_matching(perm, used, rng, max_swaps):
    """Swap entries of ``perm`` until no ``(i, perm[i])`` hits ``used``.

    Each swap only happens when both new pairs are free, so the number of
    colliding rows never increases. Returns False if ``max_swaps`` runs out.
    """
    n = perm.size
    bad = list(np.flatnonzero(used[np.arange(n), perm]))
    swaps = 0
    while bad:
        i = bad[-1]
        if not used[i, perm[i]]:
            bad.pop()
            continue
        j = int(rng.integers(n))
        swaps += 1
        if swaps > max_swaps:
            return False
        if j != i and not used[i, perm[j]] and not used[j, perm[i]]:
            perm[i], perm[j] = perm[j], perm[i]
            bad.pop()
    return True


def _union_of_matchings(n, d, rng):
    used = np.zeros((n, n), dtype=bool)
    budget = 10 * d
    draws = 0
    placed = 0
    while placed < d:
        if draws >= budget:
            raise GenerationFailureError(
                f"could not place {d} disjoint perfect matchings on {n} vertices within {budget} draws"
            )
        draws += 1
        perm = rng.permutation(n)
        if not _repair_matching(perm, used, rng, max_swaps=4 * n * n):
            continue
        used[np.arange(n), perm] = True
        placed += 1
    return used


def gen_random_d_regular(n, d, seed=None):
    """Bipartite d-regular sample set on ``n x n``: a union of d random perfect matchings.

    A matching that collides with earlier ones is repaired by random
    transpositions; a matching that cannot be repaired is redrawn, with at
    most ``10 d`` draws in total. For ``d > n/2`` the complement graph of
    degree ``n - d`` is built instead and inverted.
    """
    n, d = int(n), int(d)
    if n < 1:
        raise InvalidArgumentError("n must be positive")
    if not 1 <= d <= n:
        raise InvalidArgumentError(f"degree d={d} must satisfy 1 <= d <= n={n}")
    rng = _rng(seed)
    if 2 * d > n:
        mask = ~_union_of_matchings(n, n - d, rng) if d < n else np.ones((n, n), dtype=bool)
    else:
        mask = _union_of_matchings(n, d, rng)
    omega = SampleSet.from_mask(mask)
    if not (np.all(omega.row_degrees == d) and np.all(omega.col_degrees == d)):
        raise GenerationFailureError("generated graph is not d-regular")
    return omega


def gen_erdos_renyi(n1, n2, p, seed=None):
    """Each of the ``n1 * n2`` pairs is observed independently with probability ``p``."""
    if not 0.0 < p <= 1.0:
        raise InvalidArgumentError(f"edge probability p={p} must lie in (0, 1]")
    mask = _rng(seed).random((int(n1), int(n2))) < p
    if not mask.any():
        raise InvalidArgumentError("Erdos-Renyi draw produced no edges")
    return SampleSet.from_mask(mask)


def trim(omega, factor=2.0):
    """Drop every edge of rows/columns whose degree exceeds ``factor`` times the mean.

    Passes are repeated until no vertex exceeds the threshold, which makes
    the operation idempotent. Indices are kept; trimmed vertices just lose
    all their edges.
    """
    if factor < 1.0:
        raise InvalidArgumentError(f"trim factor {factor} must be at least 1")
    mask = omega.mask()
    while True:
        m = mask.sum()
        if m == 0:
            break
        rows = mask.sum(axis=1)
        cols = mask.sum(axis=0)
        heavy_rows = rows > factor * m / omega.n1
        heavy_cols = cols > factor * m / omega.n2
        if not heavy_rows.any() and not heavy_cols.any():
            break
        mask[heavy_rows, :] = False
        mask[:, heavy_cols] = False
    return SampleSet.from_mask(mask)


def _half_labels(n):
    labels = np.ones(n, dtype=np.int8)
    labels[: (n + 1) // 2] = 0
    return labels


def gen_block_model(params):
    """Two-cluster block model: same-half pairs w.p. ``p``, cross-half pairs w.p. ``q``.

    Both sides are split into halves (the first half takes the extra vertex
    when the size is odd); row half ``a`` and column half ``a`` form a cluster.
    """
    rows = _half_labels(params.n1)
    cols = _half_labels(params.n2)
    same = rows[:, None] == cols[None, :]
    prob = np.where(same, params.p, params.q)
    mask = _rng(params.seed).random((params.n1, params.n2)) < prob
    return SampleSet.from_mask(mask)


def spectrum(omega):
    """Top two singular values of the biadjacency matrix plus regularity checks."""
    if omega.size == 0:
        raise InvalidArgumentError("spectrum of an empty sample set is undefined")
    G = omega.biadjacency()
    s = singular_values(G)
    sigma1 = float(s[0])
    sigma2 = float(s[1]) if s.size > 1 else 0.0
    row_reg = omega.is_row_regular
    col_reg = omega.is_col_regular
    d = omega.degree if row_reg else None
    d_ref = d if d is not None else omega.mean_row_degree
    g1_residual = float(np.linalg.norm(G @ np.ones(omega.n2) - d_ref))
    ramanujan = bool(row_reg and col_reg and sigma2 <= 2.0 * math.sqrt(d - 1) + 1e-9)
    return SpectrumReport(
        sigma1=sigma1,
        sigma2=sigma2,
        relative_gap=1.0 - sigma2 / sigma1 if sigma1 > 0 else 0.0,
        measured_C=sigma2 / math.sqrt(omega.mean_row_degree),
        is_row_regular=row_reg,
        is_col_regular=col_reg,
        d=d,
        ramanujan=ramanujan,
        g1_residual=g1_residual,
        n_edges=omega.size,
    )
