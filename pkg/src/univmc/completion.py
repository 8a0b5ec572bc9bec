"""Recovery procedures: the rescaled rank-k initializer and nuclear-norm minimization.

The nuclear-norm program ``min ||X||_* s.t. P_Omega(X) = P_Omega(M)`` is
solved with an inexact augmented Lagrangian method. Each iteration takes a
singular value thresholding step at ``1 / penalty`` and moves the dual on
the observed residual. The penalty is multiplied by ``penalty_growth``
only on iterations where the primal iterate moved by less than
``growth_gate`` (relative to the data norm); growing it unconditionally
freezes the iterate before it reaches the minimizer.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core import _full_svd, as_matrix, best_rank_k, project_omega
from .errors import InvalidArgumentError

__all__ = [
    "SolverConfig",
    "SolveResult",
    "spectral_approx",
    "approx_error_bound",
    "svt_shrink",
    "solve_nuclear_norm",
]

SUCCESS_THRESHOLD = 0.01


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 500
    tol: float = 1e-7
    penalty_init: float | None = None
    penalty_growth: float = 1.5
    growth_gate: float = 1e-4
    seed: int = 0
    success_threshold: float = SUCCESS_THRESHOLD

    def __post_init__(self):
        if self.max_iters < 1:
            raise InvalidArgumentError("max_iters must be at least 1")
        if not self.tol > 0:
            raise InvalidArgumentError("tol must be positive")
        if not self.penalty_growth > 1:
            raise InvalidArgumentError("penalty_growth must exceed 1")
        if self.growth_gate < 0:
            raise InvalidArgumentError("growth_gate must be nonnegative")
        if self.penalty_init is not None and not self.penalty_init > 0:
            raise InvalidArgumentError("penalty_init must be positive")


@dataclass
class SolveResult:
    X: np.ndarray
    iterations: int
    final_residual: float
    converged: bool
    rel_error_vs_truth: float | None = None
    success: bool | None = None
    wall_time: float = 0.0
    residual_history: list = field(default_factory=list, repr=False)


def spectral_approx(observed, omega, k, allow_irregular=False):
    """``(n/d) P_k(P_Omega(M))`` for a d-regular sample set.

    The rescaling used is ``n1 * n2 / |Omega|``, which is n/d for regular
    sampling. Irregular sets are rejected unless ``allow_irregular`` is
    set, in which case the same mean-degree rescaling is applied.
    """
    observed = as_matrix(observed, "observed")
    if observed.shape != omega.shape:
        raise InvalidArgumentError(f"observed shape {observed.shape} does not match sample set {omega.shape}")
    if omega.size == 0:
        raise InvalidArgumentError("empty sample set")
    if not omega.is_regular and not allow_irregular:
        raise InvalidArgumentError("spectral_approx needs a regular sample set (pass allow_irregular=True to use mean degree)")
    return omega.scale * best_rank_k(project_omega(observed, omega), k)


def approx_error_bound(mu0, r, d, C, M_norm):
    """The two spectral-norm error bounds for the rescaled observation.

    Returns ``(C mu0 r ||M|| / sqrt(d), 2 C mu0 r ||M|| / sqrt(d))``: the
    first bounds the unprojected rescaled observation, the second its
    best rank-k approximation for any k >= r.
    """
    if d <= 0:
        raise InvalidArgumentError("d must be positive")
    for name, v in (("mu0", mu0), ("r", r), ("C", C), ("M_norm", M_norm)):
        if v < 0:
            raise InvalidArgumentError(f"{name} must be nonnegative")
    base = C * mu0 * r * M_norm / math.sqrt(d)
    return base, 2.0 * base


def svt_shrink(A, tau):
    """Singular value soft-thresholding ``U max(S - tau, 0) V^T``."""
    if tau < 0:
        raise InvalidArgumentError("tau must be nonnegative")
    A = as_matrix(A, "A")
    return _shrink(A, tau)[0]


def _shrink(A, tau):
    U, s, Vt = _full_svd(A)
    keep = int(np.count_nonzero(s > tau))
    if keep == 0:
        return np.zeros_like(A), 0
    return (U[:, :keep] * (s[:keep] - tau)) @ Vt[:keep], keep


# kept singular values below this fraction of the largest lose too many digits when squared
_GRAM_RELATIVE_FLOOR = 1e-6


def _shrink_gram(A, tau):
    """Soft-thresholding via the eigendecomposition of the smaller Gram matrix.

    Roughly twice as fast as a full SVD at n = 500. Falls back to the SVD
    whenever a kept singular value is too small for the squared spectrum
    to resolve it accurately.
    """
    if A.shape[0] < A.shape[1]:
        X, keep = _shrink_gram(A.T, tau)
        return X.T, keep
    w, V = scipy.linalg.eigh(A.T @ A, driver="evd", check_finite=False)
    s = np.sqrt(np.clip(w[::-1], 0.0, None))
    keep = int(np.count_nonzero(s > tau))
    if keep == 0:
        return np.zeros_like(A), 0
    if s[keep - 1] < _GRAM_RELATIVE_FLOOR * s[0]:
        return _shrink(A, tau)
    # negative-stride views bypass BLAS
    Vk = np.ascontiguousarray(V[:, ::-1][:, :keep])
    s = s[:keep]
    return ((A @ Vk) * ((s - tau) / s)) @ Vk.T, keep


def solve_nuclear_norm(observed, omega, cfg=None, truth=None):
    """Minimize the nuclear norm subject to agreeing with ``observed`` on ``omega``.

    Entries of ``observed`` outside ``omega`` are ignored. The run stops
    once ``||P_Omega(X) - observed||_F / ||observed||_F <= cfg.tol``; if
    ``max_iters`` is hit first the iterate with the smallest residual is
    returned with ``converged=False``. When ``truth`` is given the
    relative Frobenius error and the success flag are filled in.
    """
    cfg = cfg or SolverConfig()
    observed = as_matrix(observed, "observed")
    if observed.shape != omega.shape:
        raise InvalidArgumentError(f"observed shape {observed.shape} does not match sample set {omega.shape}")
    if omega.size == 0:
        raise InvalidArgumentError("cannot complete from an empty sample set")
    if truth is not None:
        truth = as_matrix(truth, "truth")
        if truth.shape != observed.shape:
            raise InvalidArgumentError("truth shape does not match observed")
    start = time.perf_counter()
    mask = omega.mask()
    D = np.where(mask, observed, 0.0)
    d_norm = float(np.linalg.norm(D))

    if d_norm == 0.0:
        X = np.zeros_like(D)
        history = [0.0]
        it, best_res, converged = 0, 0.0, True
    else:
        mu = cfg.penalty_init if cfg.penalty_init is not None else 1.0 / float(_full_svd(D)[1][0])
        dual = np.zeros_like(D)
        X = np.zeros_like(D)
        best_X, best_res = X, math.inf
        history = []
        converged = False
        it = 0
        for it in range(1, cfg.max_iters + 1):
            # unobserved entries carry the previous iterate, observed ones the data
            target = np.where(mask, D + dual / mu, X)
            X_new, _ = _shrink_gram(target, 1.0 / mu)
            change = float(np.linalg.norm(X_new - X)) / d_norm
            X = X_new
            resid = np.where(mask, D - X, 0.0)
            res = float(np.linalg.norm(resid)) / d_norm
            history.append(res)
            if res < best_res:
                best_X, best_res = X, res
            if res <= cfg.tol:
                converged = True
                break
            dual += mu * resid
            if change < cfg.growth_gate:
                mu *= cfg.penalty_growth
        X = best_X

    result = SolveResult(
        X=X,
        iterations=it,
        final_residual=best_res,
        converged=converged,
        wall_time=time.perf_counter() - start,
        residual_history=history,
    )
    if truth is not None:
        t_norm = float(np.linalg.norm(truth))
        err = float(np.linalg.norm(X - truth))
        result.rel_error_vs_truth = err / t_norm if t_norm > 0 else err
        result.success = bool(result.rel_error_vs_truth < cfg.success_threshold)
    return result
