"""Incoherence measurements of a factor: mu0, strong incoherence mu1, and delta_d."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import LowRankFactor
from .errors import InvalidArgumentError, TooLargeError

__all__ = [
    "IncoherenceReport",
    "SUBSET_BUDGET",
    "mu0",
    "mu1_sip",
    "delta_d_exact",
    "delta_d_estimate",
    "claim1_bound",
    "count_subset_classes",
    "audit",
]

SUBSET_BUDGET = 2_000_000
DEFAULT_DELTA_BUDGET = 1.0 / 6.0
_CHUNK = 4096


@dataclass(frozen=True)
class IncoherenceReport:
    mu0: float
    mu1: float
    delta_d: float
    delta_method: str
    delta_upper_bound: float
    d: int
    rank: int
    a1_pass: bool
    a2_pass: bool
    delta_budget: float
    mu0_budget: float
    measured_C: float | None = None
    required_d: float | None = None
    precondition_d: bool | None = None
    trials: int | None = None
    seed: int | None = None


def _require_factor(f):
    if not isinstance(f, LowRankFactor):
        raise InvalidArgumentError("expected a LowRankFactor")
    return f


def _row_coherence(W):
    n, r = W.shape
    return n * float(np.max(np.sum(W * W, axis=1))) / r


def mu0(f):
    """Smallest mu0 with ``||U^i||^2 <= mu0 r / n1`` and ``||V^j||^2 <= mu0 r / n2``."""
    f = _require_factor(f)
    return max(_row_coherence(f.U), _row_coherence(f.V))


def _sip_side(W):
    n, r = W.shape
    dev = W @ W.T
    dev[np.diag_indices(n)] -= r / n
    return n * float(np.max(np.abs(dev))) / math.sqrt(r)


def mu1_sip(f):
    """Smallest mu1 with ``|<e_i, UU^T e_j> - (r/n) 1{i=j}| <= mu1 sqrt(r) / n`` on both sides."""
    f = _require_factor(f)
    return max(_sip_side(f.U), _sip_side(f.V))


def claim1_bound(f):
    """Upper bound ``mu1 * sqrt(r)`` on delta_d, valid for every d >= r."""
    f = _require_factor(f)
    return mu1_sip(f) * math.sqrt(f.rank)


def _outer_products(W):
    return np.einsum("ki,kj->kij", W, W)


def _row_classes(W):
    """Group rows whose outer products ``W^k W^k^T`` are bitwise identical."""
    outer = _outer_products(W)
    keys = outer.reshape(W.shape[0], -1)
    uniq, counts = np.unique(keys, axis=0, return_counts=True)
    r = W.shape[1]
    return uniq.reshape(-1, r, r), counts


def _count_compositions(counts, d):
    # ways[t] = number of count vectors over the groups seen so far summing to t
    ways = [1] + [0] * d
    for c in counts:
        nxt = [0] * (d + 1)
        for t, w in enumerate(ways):
            if w:
                for k in range(min(int(c), d - t) + 1):
                    nxt[t + k] += w
        ways = nxt
    return ways[d]


def count_subset_classes(W, d):
    """Number of distinct Gram sums over size-``d`` row subsets of ``W`` that exact enumeration visits."""
    _, counts = _row_classes(np.asarray(W, dtype=np.float64))
    return _count_compositions(counts, int(d))


def _compositions(counts, d):
    """Yield count vectors ``c`` with ``0 <= c_g <= counts_g`` and ``sum(c) = d``."""
    counts = [int(c) for c in counts]
    g = len(counts)
    if all(c == 1 for c in counts):
        for idx in itertools.combinations(range(g), d):
            c = [0] * g
            for i in idx:
                c[i] = 1
            yield c
        return
    suffix = [0] * (g + 1)
    for i in range(g - 1, -1, -1):
        suffix[i] = suffix[i + 1] + counts[i]
    c = [0] * g
    # explicit stack of (group index, remaining, next value to try)
    stack = [(0, d, max(0, d - suffix[1]))]
    while stack:
        idx, remaining, k = stack.pop()
        if k > min(counts[idx], remaining):
            continue
        stack.append((idx, remaining, k + 1))
        c[idx] = k
        if idx + 1 == g:
            if remaining == k:
                yield list(c)
            continue
        rest = remaining - k
        stack.append((idx + 1, rest, max(0, rest - suffix[idx + 2])))


def _max_deviation(gram_sums, scale):
    r = gram_sums.shape[-1]
    eig = np.linalg.eigvalsh(scale * gram_sums - np.eye(r))
    return float(np.max(np.abs(eig)))


def _delta_exact_side(W, d, budget):
    n, r = W.shape
    if not 1 <= d <= n:
        raise InvalidArgumentError(f"subset size d={d} must lie in [1, {n}]")
    classes, counts = _row_classes(W)
    total = _count_compositions(counts, d)
    if total > budget:
        raise TooLargeError(
            f"exact delta_d needs {total} subset classes (budget {budget}); use delta_d_estimate instead"
        )
    flat = classes.reshape(len(counts), -1)
    best = 0.0
    batch = []
    for comp in _compositions(counts, d):
        batch.append(comp)
        if len(batch) == _CHUNK:
            sums = (np.asarray(batch, dtype=np.float64) @ flat).reshape(-1, r, r)
            best = max(best, _max_deviation(sums, n / d))
            batch = []
    if batch:
        sums = (np.asarray(batch, dtype=np.float64) @ flat).reshape(-1, r, r)
        best = max(best, _max_deviation(sums, n / d))
    return best


def delta_d_exact(f, d, budget=SUBSET_BUDGET):
    """Exact ``max_S ||(n/d) sum_{k in S} U^k U^k^T - I||`` over all size-``d`` subsets, both sides.

    Rows with identical outer products are interchangeable, so subsets are
    enumerated as count vectors over those classes; the budget applies to
    the number of such classes (``C(n, d)`` when all rows differ). The
    column side uses the same subset size ``d``.
    """
    f = _require_factor(f)
    d = int(d)
    return max(_delta_exact_side(f.U, d, budget), _delta_exact_side(f.V, d, budget))


def _delta_estimate_side(W, d, trials, rng):
    n, r = W.shape
    if not 1 <= d <= n:
        raise InvalidArgumentError(f"subset size d={d} must lie in [1, {n}]")
    outer = _outer_products(W)
    best = 0.0
    done = 0
    while done < trials:
        # full chunks are always drawn so that a longer run replays a shorter one
        keys = rng.random((_CHUNK, n))
        take = min(_CHUNK, trials - done)
        subsets = np.argpartition(keys[:take], d - 1, axis=1)[:, :d] if d < n else np.tile(np.arange(n), (take, 1))
        sums = outer[subsets].sum(axis=1)
        best = max(best, _max_deviation(sums, n / d))
        done += take
    return best


def delta_d_estimate(f, d, trials, seed=None):
    """Running max of the A2 deviation over ``trials`` uniformly random size-``d`` subsets.

    This is a lower bound on delta_d. For a fixed seed the subsets of a
    shorter run are a prefix of those of a longer run, so the estimate is
    nondecreasing in ``trials``.
    """
    f = _require_factor(f)
    trials = int(trials)
    if trials < 1:
        raise InvalidArgumentError("trials must be at least 1")
    ss = np.random.SeedSequence(seed)
    rng_u, rng_v = (np.random.default_rng(s) for s in ss.spawn(2))
    d = int(d)
    return max(_delta_estimate_side(f.U, d, trials, rng_u), _delta_estimate_side(f.V, d, trials, rng_v))


def delta_d(f, d, trials=20_000, seed=0, budget=SUBSET_BUDGET):
    """Exact delta_d when enumeration fits the budget, otherwise the Monte Carlo lower bound.

    Returns ``(value, method)`` with method ``"exact-enumeration"`` or
    ``"monte-carlo(trials=..., seed=...)"``.
    """
    try:
        return delta_d_exact(f, d, budget), "exact-enumeration"
    except TooLargeError:
        return delta_d_estimate(f, d, trials, seed), f"monte-carlo(trials={trials}, seed={seed})"


def audit(f, omega, delta_budget=DEFAULT_DELTA_BUDGET, mu0_budget=math.inf, trials=20_000, seed=0,
          gate="measured", budget=SUBSET_BUDGET):
    """Measure A1/A2 for ``f`` against the degree of ``omega``.

    ``gate`` chooses which delta value decides ``a2_pass``: ``"measured"``
    (exact or Monte Carlo) or ``"claim1"`` (the mu1 sqrt(r) upper bound).
    Irregular sample sets are audited at the rounded mean row degree.
    """
    from .graphs import spectrum

    f = _require_factor(f)
    if omega.shape != f.shape:
        raise InvalidArgumentError(f"sample set shape {omega.shape} does not match factor shape {f.shape}")
    if gate not in ("measured", "claim1"):
        raise InvalidArgumentError(f"unknown gate {gate!r}")
    d = omega.degree if omega.is_regular else max(1, int(round(omega.mean_row_degree)))
    d = min(d, f.shape[0], f.shape[1])
    m0 = mu0(f)
    m1 = mu1_sip(f)
    upper = m1 * math.sqrt(f.rank)
    delta, method = delta_d(f, d, trials, seed, budget)
    if method == "exact-enumeration":
        upper = min(upper, delta)
    gated = delta if gate == "measured" else upper
    spec = spectrum(omega)
    required = 36.0 * spec.measured_C**2 * m0**2 * f.rank**2
    return IncoherenceReport(
        mu0=m0,
        mu1=m1,
        delta_d=delta,
        delta_method=method,
        delta_upper_bound=upper,
        d=d,
        rank=f.rank,
        a1_pass=bool(m0 <= mu0_budget),
        a2_pass=bool(gated <= delta_budget),
        delta_budget=float(delta_budget),
        mu0_budget=float(mu0_budget),
        measured_C=spec.measured_C,
        required_d=required,
        precondition_d=bool(d >= required),
        trials=trials if method != "exact-enumeration" else None,
        seed=seed if method != "exact-enumeration" else None,
    )
