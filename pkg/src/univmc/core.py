"""Dense linear algebra kernels and the three projection operators.

Matrices are plain 2-D ``float64`` numpy arrays. :func:`as_matrix` is the
single validation checkpoint (shape and finiteness); everything else
assumes its inputs already went through it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import InvalidArgumentError, NumericalFailureError

__all__ = [
    "as_matrix",
    "SampleSet",
    "LowRankFactor",
    "SVDResult",
    "svd",
    "best_rank_k",
    "project_omega",
    "project_T",
    "project_T_perp",
    "spectral_norm",
    "frobenius_norm",
    "inf_norm",
    "nuclear_norm",
]

ORTHONORMAL_TOL = 1e-10


def as_matrix(a, name="matrix"):
    """Return ``a`` as a finite 2-D float64 array, or raise."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidArgumentError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} contains NaN or Inf entries")
    return arr


@dataclass(frozen=True, eq=False)
class SampleSet:
    """The observed index set of an ``n1 x n2`` matrix.

    ``edges`` is an ``(m, 2)`` integer array of 0-based ``(row, col)``
    pairs, kept in the order given. Degrees are derived, never supplied.
    """

    n1: int
    n2: int
    edges: np.ndarray
    row_degrees: np.ndarray = field(init=False)
    col_degrees: np.ndarray = field(init=False)

    def __post_init__(self):
        n1, n2 = int(self.n1), int(self.n2)
        if n1 < 1 or n2 < 1:
            raise InvalidArgumentError(f"sample set dimensions must be positive, got {n1}x{n2}")
        edges = np.asarray(self.edges, dtype=np.int64)
        if edges.size == 0:
            edges = edges.reshape(0, 2)
        if edges.ndim != 2 or edges.shape[1] != 2:
            raise InvalidArgumentError(f"edges must have shape (m, 2), got {edges.shape}")
        if edges.shape[0]:
            i, j = edges[:, 0], edges[:, 1]
            if i.min() < 0 or i.max() >= n1 or j.min() < 0 or j.max() >= n2:
                raise InvalidArgumentError(f"edge index out of range for a {n1}x{n2} matrix")
            flat = i * n2 + j
            if np.unique(flat).size != flat.size:
                raise InvalidArgumentError("edges contain duplicate (i, j) pairs")
        edges = edges.copy()
        edges.flags.writeable = False
        rows = np.bincount(edges[:, 0], minlength=n1)
        cols = np.bincount(edges[:, 1], minlength=n2)
        rows.flags.writeable = False
        cols.flags.writeable = False
        object.__setattr__(self, "n1", n1)
        object.__setattr__(self, "n2", n2)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "row_degrees", rows)
        object.__setattr__(self, "col_degrees", cols)

    @classmethod
    def from_mask(cls, mask):
        mask = np.asarray(mask, dtype=bool)
        if mask.ndim != 2:
            raise InvalidArgumentError("mask must be 2-D")
        return cls(mask.shape[0], mask.shape[1], np.argwhere(mask))

    @classmethod
    def complete(cls, n1, n2):
        return cls.from_mask(np.ones((n1, n2), dtype=bool))

    @property
    def shape(self):
        return (self.n1, self.n2)

    @property
    def size(self):
        return int(self.edges.shape[0])

    def __len__(self):
        return self.size

    def mask(self):
        m = np.zeros((self.n1, self.n2), dtype=bool)
        m[self.edges[:, 0], self.edges[:, 1]] = True
        return m

    def biadjacency(self):
        """The 0/1 matrix G with G[i, j] = 1 iff (i, j) is observed."""
        return self.mask().astype(np.float64)

    @property
    def is_row_regular(self):
        return bool(np.all(self.row_degrees == self.row_degrees[0]))

    @property
    def is_col_regular(self):
        return bool(np.all(self.col_degrees == self.col_degrees[0]))

    @property
    def is_regular(self):
        return self.is_row_regular and self.is_col_regular

    @property
    def degree(self):
        """Common row degree when every row has the same degree, else ``None``."""
        return int(self.row_degrees[0]) if self.is_row_regular else None

    @property
    def mean_row_degree(self):
        return self.size / self.n1

    @property
    def mean_col_degree(self):
        return self.size / self.n2

    @property
    def scale(self):
        """The rescaling ``n1 * n2 / |Omega|``; equals n/d for square d-regular sampling."""
        if self.size == 0:
            raise InvalidArgumentError("empty sample set has no rescaling factor")
        return self.n1 * self.n2 / self.size

    def __eq__(self, other):
        if not isinstance(other, SampleSet):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.mask(), other.mask())

    def __hash__(self):
        return hash((self.n1, self.n2, self.mask().tobytes()))


@dataclass(frozen=True, eq=False)
class LowRankFactor:
    """An SVD-style triple ``(U, sigma, V)`` with orthonormal columns."""

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        U = np.asarray(self.U, dtype=np.float64)
        V = np.asarray(self.V, dtype=np.float64)
        sigma = np.asarray(self.sigma, dtype=np.float64).reshape(-1)
        if U.ndim != 2 or V.ndim != 2:
            raise InvalidArgumentError("U and V must be 2-D")
        r = U.shape[1]
        if r == 0:
            raise InvalidArgumentError("rank-0 factors are not supported")
        if V.shape[1] != r or sigma.shape[0] != r:
            raise InvalidArgumentError(
                f"inconsistent ranks: U has {r} columns, V has {V.shape[1]}, sigma has {sigma.shape[0]}"
            )
        for name, a in (("U", U), ("sigma", sigma), ("V", V)):
            if not np.all(np.isfinite(a)):
                raise InvalidArgumentError(f"{name} contains NaN or Inf entries")
        eye = np.eye(r)
        if np.linalg.norm(U.T @ U - eye) > ORTHONORMAL_TOL:
            raise InvalidArgumentError("columns of U are not orthonormal")
        if np.linalg.norm(V.T @ V - eye) > ORTHONORMAL_TOL:
            raise InvalidArgumentError("columns of V are not orthonormal")
        if np.any(sigma < 0) or np.any(np.diff(sigma) > 0):
            raise InvalidArgumentError("sigma must be nonnegative and nonincreasing")
        for name, a in (("U", U), ("sigma", sigma), ("V", V)):
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    @classmethod
    def from_matrix(cls, M, r):
        """Top-``r`` singular triples of ``M``."""
        return svd(M, r).factor

    @classmethod
    def from_orthonormal(cls, U, V):
        """Factor with unit singular values, i.e. ``M = U V^T``."""
        U = np.asarray(U, dtype=np.float64)
        return cls(U, np.ones(U.shape[1]), V)

    @property
    def rank(self):
        return self.U.shape[1]

    @property
    def shape(self):
        return (self.U.shape[0], self.V.shape[0])

    def matrix(self):
        return (self.U * self.sigma) @ self.V.T

    def sign_matrix(self):
        """``U V^T``, the direction of the matrix in its tangent space."""
        return self.U @ self.V.T


@dataclass(frozen=True)
class SVDResult:
    factor: LowRankFactor
    residual_norm: float


def _full_svd(A):
    try:
        return scipy.linalg.svd(A, full_matrices=False, lapack_driver="gesdd", check_finite=False)
    except np.linalg.LinAlgError:
        pass
    # gesdd occasionally fails where the slower QR-iteration driver succeeds
    try:
        return scipy.linalg.svd(A, full_matrices=False, lapack_driver="gesvd", check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"SVD did not converge: {exc}") from exc


def svd(A, k):
    """Top-``k`` singular triples of ``A`` and the Frobenius residual of the truncation.

    When singular values tie at position ``k`` the first ``k`` triples in
    LAPACK order are kept; any such choice is an optimal rank-``k``
    approximation.
    """
    A = as_matrix(A, "A")
    k = int(k)
    if not 1 <= k <= min(A.shape):
        raise InvalidArgumentError(f"rank k={k} must lie in [1, {min(A.shape)}]")
    U, s, Vt = _full_svd(A)
    # LAPACK returns orthonormal singular vectors even for zero singular values
    factor = LowRankFactor(U[:, :k], s[:k], Vt[:k].T)
    residual = A - (factor.U * factor.sigma) @ factor.V.T
    return SVDResult(factor, float(np.linalg.norm(residual)))


def best_rank_k(A, k):
    """The rank-``k`` truncation ``P_k(A)`` as a dense matrix."""
    f = svd(A, k).factor
    return f.matrix()


def _check_shape(A, shape, what):
    if A.shape != tuple(shape):
        raise InvalidArgumentError(f"{what}: matrix shape {A.shape} does not match {tuple(shape)}")


def project_omega(A, omega):
    """Keep the entries of ``A`` indexed by ``omega`` and zero the rest."""
    A = as_matrix(A, "A")
    _check_shape(A, omega.shape, "project_omega")
    out = np.zeros_like(A)
    i, j = omega.edges[:, 0], omega.edges[:, 1]
    out[i, j] = A[i, j]
    return out


def _factor_dims(Z, f):
    if not isinstance(f, LowRankFactor):
        raise InvalidArgumentError("expected a LowRankFactor")
    Z = as_matrix(Z, "Z")
    _check_shape(Z, f.shape, "tangent-space projection")
    return Z


def project_T(Z, f):
    """Projection onto the tangent space ``{U X^T + Y V^T}``."""
    Z = _factor_dims(Z, f)
    U, V = f.U, f.V
    UtZ = U.T @ Z
    ZV = Z @ V
    return U @ UtZ + ZV @ V.T - U @ (UtZ @ V) @ V.T


def project_T_perp(Z, f):
    """Projection onto the orthogonal complement ``(I - UU^T) Z (I - VV^T)``."""
    Z = _factor_dims(Z, f)
    U, V = f.U, f.V
    left = Z - U @ (U.T @ Z)
    return left - (left @ V) @ V.T


def spectral_norm(A):
    A = as_matrix(A, "A")
    return float(_full_svd(A)[1][0])


def frobenius_norm(A):
    return float(np.linalg.norm(as_matrix(A, "A")))


def inf_norm(A):
    """Largest absolute entry."""
    return float(np.max(np.abs(as_matrix(A, "A"))))


def nuclear_norm(A):
    A = as_matrix(A, "A")
    return float(np.sum(_full_svd(A)[1]))


def singular_values(A):
    return _full_svd(as_matrix(A, "A"))[1]
