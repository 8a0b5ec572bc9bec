"""Two incoherent rank-2 matrices that agree on a given sample set of size at most n^2/4.

Two rows whose observed columns ``S`` number at most n/2 are chosen (the
two lowest-degree rows always qualify). ``S`` is padded to a set ``S'`` of
n/2 columns, and

* ``V^j = [1, 1]/sqrt(n)`` for ``j`` in ``S'``, ``[1, -1]/sqrt(n)`` otherwise;
* the two chosen rows of ``U`` are ``[a, -a]`` and ``[b, -b]`` with
  ``a^2 + b^2 = 2/n``;
* of the remaining rows, n/2 are ``[1, 1]/sqrt(n)`` and n/2 - 2 are
  ``[1, -1]/sqrt(n)``, which makes the columns of ``U`` exactly orthogonal.

The chosen rows of ``U V^T`` vanish on ``S'``, so every observed entry is
independent of ``(a, b)``. Swapping ``a = 1/sqrt(2n)`` and
``b = sqrt(3/(2n))`` gives two different matrices with identical samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .completion import SolverConfig, solve_nuclear_norm
from .core import SampleSet, project_omega, singular_values
from .errors import ConstructionFailureError, InvalidArgumentError

__all__ = ["CounterexamplePair", "FailureReport", "build_counterexample", "demonstrate_failure"]

RANK_TOL = 1e-10


@dataclass
class CounterexamplePair:
    Ma: np.ndarray
    Mb: np.ndarray
    omega: SampleSet
    agreement_residual: float
    separation: float
    rows: tuple
    columns: tuple
    Ua: np.ndarray
    Ub: np.ndarray
    V: np.ndarray


@dataclass(frozen=True)
class FailureReport:
    rel_error_a: float
    rel_error_b: float
    separation: float
    relative_separation: float
    both_within_half_threshold: bool
    non_recovery_confirmed: bool
    unrecovered: tuple
    iterations: int
    converged: bool


def _pick_rows(omega, n):
    mask = omega.mask()
    order = np.argsort(omega.row_degrees, kind="stable")
    r1, r2 = int(order[0]), int(order[1])
    cols = np.flatnonzero(mask[r1] | mask[r2])
    if cols.size > n // 2:
        raise ConstructionFailureError(
            f"rows {r1 + 1} and {r2 + 1} observe {cols.size} > n/2 columns; "
            f"|Omega| = {omega.size} violates the n^2/4 counting bound"
        )
    return (r1, r2), cols


def _factors(n, rows, padded_cols, a, b):
    h = 1.0 / math.sqrt(n)
    V = np.empty((n, 2))
    V[:, 0] = h
    V[:, 1] = -h
    V[padded_cols, 1] = h
    U = np.empty((n, 2))
    others = [i for i in range(n) if i not in rows]
    plus = others[: n // 2]
    minus = others[n // 2 :]
    U[plus] = [h, h]
    U[minus] = [h, -h]
    U[rows[0]] = [a, -a]
    U[rows[1]] = [b, -b]
    return U, V


def build_counterexample(n, omega):
    """Construct the pair for an even ``n >= 8`` and ``|omega| <= n^2/4``."""
    n = int(n)
    if n < 8 or n % 2:
        raise InvalidArgumentError(f"n={n} must be even and at least 8")
    if omega.shape != (n, n):
        raise InvalidArgumentError(f"sample set shape {omega.shape} is not {n}x{n}")
    if 4 * omega.size > n * n:
        raise InvalidArgumentError(f"|Omega| = {omega.size} exceeds n^2/4 = {n * n // 4}")
    rows, cols = _pick_rows(omega, n)
    padded = list(cols)
    for j in range(n):
        if len(padded) == n // 2:
            break
        if j not in set(cols):
            padded.append(j)
    padded = np.array(sorted(padded), dtype=np.int64)

    a, b = 1.0 / math.sqrt(2 * n), math.sqrt(3.0 / (2 * n))
    Ua, V = _factors(n, rows, padded, a, b)
    Ub, _ = _factors(n, rows, padded, b, a)
    eye = np.eye(2)
    for name, W in (("U_a", Ua), ("U_b", Ub), ("V", V)):
        if np.linalg.norm(W.T @ W - eye) > 1e-10:
            raise ConstructionFailureError(f"{name} does not have orthonormal columns")

    Ma = Ua @ V.T
    Mb = Ub @ V.T
    agreement = float(np.linalg.norm(project_omega(Ma - Mb, omega)))
    separation = float(np.linalg.norm(Ma - Mb))
    for name, M in (("Ma", Ma), ("Mb", Mb)):
        s = singular_values(M)
        if s[2] >= RANK_TOL or s[1] < RANK_TOL:
            raise ConstructionFailureError(f"{name} is not rank 2 (singular values {s[:3]})")
    if agreement > 1e-12 or not separation > 0:
        raise ConstructionFailureError(
            f"construction check failed: agreement residual {agreement}, separation {separation}"
        )
    return CounterexamplePair(Ma=Ma, Mb=Mb, omega=omega, agreement_residual=agreement, separation=separation,
                              rows=rows, columns=tuple(int(j) for j in padded), Ua=Ua, Ub=Ub, V=V)


def demonstrate_failure(pair, cfg=None):
    """Complete ``P_Omega(Ma)`` and report the distance to both candidate ground truths."""
    cfg = cfg or SolverConfig()
    result = solve_nuclear_norm(project_omega(pair.Ma, pair.omega), pair.omega, cfg)
    X = result.X
    norm_a = float(np.linalg.norm(pair.Ma))
    norm_b = float(np.linalg.norm(pair.Mb))
    err_a = float(np.linalg.norm(X - pair.Ma)) / norm_a
    err_b = float(np.linalg.norm(X - pair.Mb)) / norm_b
    half = cfg.success_threshold / 2.0
    unrecovered = tuple(name for name, e in (("a", err_a), ("b", err_b)) if e >= cfg.success_threshold)
    return FailureReport(
        rel_error_a=err_a,
        rel_error_b=err_b,
        separation=pair.separation,
        relative_separation=pair.separation / (2.0 * max(norm_a, norm_b)),
        both_within_half_threshold=bool(err_a < half and err_b < half),
        non_recovery_confirmed=bool(unrecovered),
        unrecovered=unrecovered,
        iterations=result.iterations,
        converged=result.converged,
    )
