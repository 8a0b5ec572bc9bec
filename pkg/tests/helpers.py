"""Factor constructors and brute-force oracles shared by the tests."""

import itertools

import numpy as np

from univmc.core import LowRankFactor

# acceptance summary lines, printed by the conftest terminal-summary hook
ACCEPTANCE_LINES = []


def random_orthonormal(n, r, rng):
    Q, _ = np.linalg.qr(rng.standard_normal((n, r)))
    return Q


def sign_orthonormal(n, r, rng):
    """Orthonormalized random +-1 columns (rows nearly flat)."""
    Q, _ = np.linalg.qr(rng.choice([-1.0, 1.0], size=(n, r)))
    return Q


def flat_rank1(n, alternate=True):
    """Unit vector with entries +-1/sqrt(n); signs alternate when ``alternate``."""
    u = np.full((n, 1), 1.0 / np.sqrt(n))
    if alternate:
        u[1::2] *= -1.0
    return u


def structured_rank2(n):
    """Two orthonormal sign-pattern columns: ones with alternating signs, ones with a half split."""
    U = np.ones((n, 2))
    U[1::2, 1] = -1.0
    V = np.ones((n, 2))
    V[n // 2:, 1] = -1.0
    return LowRankFactor.from_orthonormal(U / np.sqrt(n), V / np.sqrt(n))


def brute_delta(W, d):
    """max over all size-d row subsets of ||(n/d) sum W_k W_k^T - I||, one side."""
    n, r = W.shape
    best = 0.0
    for S in itertools.combinations(range(n), d):
        G = (n / d) * W[list(S)].T @ W[list(S)] - np.eye(r)
        best = max(best, float(np.max(np.abs(np.linalg.eigvalsh(G)))))
    return best


def nuclear_scan(A, i, j, lo, hi, points):
    """Grid minimizer of the nuclear norm over the value of entry (i, j)."""
    grid = np.linspace(lo, hi, points)
    vals = []
    for x in grid:
        B = A.copy()
        B[i, j] = x
        vals.append(np.linalg.svd(B, compute_uv=False).sum())
    k = int(np.argmin(vals))
    return float(grid[k]), float(vals[k])
