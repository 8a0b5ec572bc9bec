"""Dual-certificate construction by golfing and numerical checks of the supporting lemmas.

All checks use the rescaling ``s = n1 * n2 / |Omega|`` (n/d for square
d-regular sampling), the measured expansion constant ``C = sigma2(G) /
sqrt(d)`` and the measured mu0 of the factor unless the caller supplies
other values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import LowRankFactor, as_matrix, project_omega, project_T, project_T_perp, spectral_norm
from .errors import InvalidArgumentError, TooLargeError
from .graphs import spectrum
from .incoherence import claim1_bound, delta_d_exact, mu0 as measure_mu0

__all__ = [
    "GolfingTrace",
    "CertificateReport",
    "InequalityCheck",
    "Lemma3Report",
    "golfing_depth",
    "golfing_construct",
    "verify_certificate",
    "check_lemma1",
    "check_lemma2",
    "check_lemma3",
    "coherence_coefficients",
    "tangent_split",
]

SLACK = 1e-9
MEMBERSHIP_TOL = 1e-8


@dataclass
class GolfingTrace:
    p: int
    clamped: bool
    raw_depth: float
    w_norms: list
    c1: list
    c2: list
    Y: np.ndarray
    C: float
    mu0: float
    d: int


@dataclass(frozen=True)
class CertificateReport:
    supported_on_omega: bool
    pt_residual: float
    pt_threshold: float
    ptperp_norm: float
    ptperp_threshold: float
    precondition_d: bool
    precondition_delta: bool
    delta_d: float
    delta_method: str
    required_d: float
    C: float
    mu0: float
    d: float
    passed: bool


@dataclass(frozen=True)
class InequalityCheck:
    lhs: float
    rhs: float
    holds: bool


@dataclass(frozen=True)
class Lemma3Report:
    inf_norm: InequalityCheck
    x_rows: InequalityCheck
    y_rows: InequalityCheck
    c1: float
    c2: float

    @property
    def holds(self):
        return self.inf_norm.holds and self.x_rows.holds and self.y_rows.holds


def _log3_argument(n, C, mu0, r):
    return n / (18.0 * C**2 * mu0**2 * r)


def golfing_depth(n, C, mu0, r):
    """``ceil(log3(n / (18 C^2 mu0^2 r)) / 2)``, clamped to at least 1."""
    for name, v in (("n", n), ("C", C), ("mu0", mu0), ("r", r)):
        if not v > 0:
            raise InvalidArgumentError(f"{name} must be positive")
    raw = 0.5 * math.log(_log3_argument(n, C, mu0, r)) / math.log(3.0)
    # exact powers of 3 can land a few ulps above the integer
    return max(1, math.ceil(raw - 1e-12))


def _sample_scale_and_degree(omega):
    if omega.size == 0:
        raise InvalidArgumentError("empty sample set")
    return omega.scale, omega.mean_row_degree


def _require_regular(omega):
    if not omega.is_regular:
        raise InvalidArgumentError("the golfing construction needs a row- and column-regular sample set")


def tangent_split(Z, f):
    """Split ``Z in T`` as ``U X^T + Y V^T`` with ``Y`` orthogonal to ``U``; returns ``(X, Y)``."""
    X = Z.T @ f.U
    Y = (Z - f.U @ X.T) @ f.V
    return X, Y


def coherence_coefficients(X, Y, mu0, r, n1, n2):
    """Smallest ``c1, c2`` with ``||X^i||^2 <= c1^2 mu0 r / n2`` and ``||Y^j||^2 <= c2^2 mu0 r / n1``."""
    c1 = math.sqrt(n2 * float(np.max(np.sum(X * X, axis=1))) / (mu0 * r))
    c2 = math.sqrt(n1 * float(np.max(np.sum(Y * Y, axis=1))) / (mu0 * r))
    return c1, c2


def _measured_C(omega):
    return spectrum(omega).measured_C


def golfing_construct(f, omega, p=None, C=None, mu0=None):
    """Run the golfing recursion from ``W_0 = U V^T`` for ``p`` steps.

    ``W_{k+1} = W_k - s P_T P_Omega W_k`` and ``Y = sum_{k<p} s P_Omega W_k``.
    The default depth comes from :func:`golfing_depth` with measured C and
    mu0; the trace records ``||W_k||_F`` and the coherence coefficients of
    every ``W_k`` (p + 1 entries each).
    """
    if not isinstance(f, LowRankFactor):
        raise InvalidArgumentError("expected a LowRankFactor")
    if omega.shape != f.shape:
        raise InvalidArgumentError(f"sample set shape {omega.shape} does not match factor shape {f.shape}")
    _require_regular(omega)
    n1, n2 = f.shape
    r = f.rank
    C = _measured_C(omega) if C is None else C
    mu0 = measure_mu0(f) if mu0 is None else mu0
    n = max(n1, n2)
    raw = math.inf
    if C > 0:
        raw = 0.5 * math.log(_log3_argument(n, C, mu0, r)) / math.log(3.0)
    if p is None:
        p = golfing_depth(n, C, mu0, r) if C > 0 else 1
        clamped = raw - 1e-12 <= 0
    else:
        p = int(p)
        if p < 1:
            raise InvalidArgumentError("golfing depth must be at least 1")
        clamped = False
    s = omega.scale
    mask = omega.mask()
    W = f.sign_matrix()
    Y = np.zeros_like(W)
    w_norms, c1s, c2s = [], [], []

    def record(W):
        w_norms.append(float(np.linalg.norm(W)))
        c1, c2 = coherence_coefficients(*tangent_split(W, f), mu0, r, n1, n2)
        c1s.append(c1)
        c2s.append(c2)

    record(W)
    for _ in range(p):
        PW = np.where(mask, W, 0.0)
        Y += s * PW
        W = W - s * project_T(PW, f)
        record(W)
    return GolfingTrace(p=p, clamped=clamped, raw_depth=raw, w_norms=w_norms, c1=c1s, c2=c2s, Y=Y,
                        C=float(C), mu0=float(mu0), d=omega.degree)


def _delta_for_checks(f, d):
    d = max(1, min(int(round(d)), *f.shape))
    try:
        return delta_d_exact(f, d), "exact-enumeration"
    except TooLargeError:
        return claim1_bound(f), "sip-bound"


def verify_certificate(Y, f, omega, delta_d=None, C=None, mu0=None):
    """Evaluate the three dual-certificate conditions for ``Y`` and the recovery preconditions.

    ``passed`` reflects only the certificate conditions; the degree and
    delta_d preconditions are reported alongside. When ``delta_d`` is not
    given it is computed exactly if enumeration fits the budget, otherwise
    the mu1 sqrt(r) upper bound is used.
    """
    Y = as_matrix(Y, "Y")
    if Y.shape != f.shape or omega.shape != f.shape:
        raise InvalidArgumentError("Y, factor and sample set shapes must agree")
    _, d = _sample_scale_and_degree(omega)
    n = max(f.shape)
    mask = omega.mask()
    supported = bool(np.all(Y[~mask] == 0.0))
    pt_residual = float(np.linalg.norm(project_T(Y, f) - f.sign_matrix()))
    ptperp = spectral_norm(project_T_perp(Y, f))
    C = _measured_C(omega) if C is None else C
    mu0 = measure_mu0(f) if mu0 is None else mu0
    if delta_d is None:
        delta_d, method = _delta_for_checks(f, d)
    else:
        method = "supplied"
    required = 36.0 * C**2 * mu0**2 * f.rank**2
    pt_thr = math.sqrt(d / (8.0 * n))
    return CertificateReport(
        supported_on_omega=supported,
        pt_residual=pt_residual,
        pt_threshold=pt_thr,
        ptperp_norm=ptperp,
        ptperp_threshold=0.5,
        precondition_d=bool(d >= required),
        precondition_delta=bool(delta_d <= 1.0 / 6.0),
        delta_d=float(delta_d),
        delta_method=method,
        required_d=required,
        C=float(C),
        mu0=float(mu0),
        d=float(d),
        passed=bool(supported and pt_residual <= pt_thr and ptperp < 0.5),
    )


def _in_T(Z, f):
    return np.linalg.norm(project_T(Z, f) - Z) <= MEMBERSHIP_TOL * max(np.linalg.norm(Z), 1e-300)


def _components(f, X, Y_mat):
    X = as_matrix(X, "X")
    Y_mat = as_matrix(Y_mat, "Y_mat")
    n1, n2 = f.shape
    if X.shape != (n2, f.rank) or Y_mat.shape != (n1, f.rank):
        raise InvalidArgumentError(f"X must be {n2}x{f.rank} and Y_mat {n1}x{f.rank}")
    y_norm = np.linalg.norm(Y_mat)
    if np.linalg.norm(f.U.T @ Y_mat) > MEMBERSHIP_TOL * y_norm:
        raise InvalidArgumentError("Y_mat must be orthogonal to U")
    return X, Y_mat


def _params(f, omega, C, mu0):
    if omega.shape != f.shape:
        raise InvalidArgumentError(f"sample set shape {omega.shape} does not match factor shape {f.shape}")
    s, d = _sample_scale_and_degree(omega)
    C = _measured_C(omega) if C is None else C
    mu0 = measure_mu0(f) if mu0 is None else mu0
    return s, d, C, mu0


def check_lemma1(f, omega, Z, delta_d, C=None, mu0=None):
    """``||s P_T P_Omega Z - Z||_F <= sqrt(2 (delta^2 + C^2 mu0^2 r^2 / d)) ||Z||_F`` for ``Z in T``."""
    Z = as_matrix(Z, "Z")
    if Z.shape != f.shape:
        raise InvalidArgumentError("Z shape does not match the factor")
    if np.any(Z) and not _in_T(Z, f):
        raise InvalidArgumentError("Z is not in the tangent space T")
    s, d, C, mu0 = _params(f, omega, C, mu0)
    lhs = float(np.linalg.norm(s * project_T(project_omega(Z, omega), f) - Z))
    rhs = math.sqrt(2.0 * (delta_d**2 + C**2 * mu0**2 * f.rank**2 / d)) * float(np.linalg.norm(Z))
    return InequalityCheck(lhs, rhs, bool(lhs <= rhs + SLACK))


def check_lemma2(f, omega, X, Y_mat, C=None, mu0=None):
    """``||s P_Omega Z - Z|| <= (c1 + c2) C mu0 r / sqrt(d)`` for ``Z = U X^T + Y V^T``.

    ``c1`` and ``c2`` are the measured coherence coefficients of ``X`` and ``Y_mat``.
    """
    X, Y_mat = _components(f, X, Y_mat)
    s, d, C, mu0 = _params(f, omega, C, mu0)
    Z = f.U @ X.T + Y_mat @ f.V.T
    c1, c2 = coherence_coefficients(X, Y_mat, mu0, f.rank, *f.shape)
    lhs = spectral_norm(s * project_omega(Z, omega) - Z)
    rhs = (c1 + c2) * C * mu0 * f.rank / math.sqrt(d)
    return InequalityCheck(lhs, rhs, bool(lhs <= rhs + SLACK))


def check_lemma3(f, omega, X, Y_mat, delta_d, C=None, mu0=None):
    """Entrywise and row-norm bounds on ``Z~ = Z - s P_T P_Omega Z``.

    Checks ``||Z~||_inf <= ((c1+c2) mu0 r / n)(delta + alpha)`` and, writing
    ``Z~ = U X~^T + Y~ V^T`` with ``Y~`` orthogonal to ``U``,
    ``max ||X~^i||^2 <= (mu0 r / n)(delta c1 + 2 c2 alpha)^2`` and
    ``max ||Y~^j||^2 <= (mu0 r / n)(delta c2 + (c1 + c2) alpha)^2``
    where ``alpha = C mu0 r / sqrt(d)``.
    """
    X, Y_mat = _components(f, X, Y_mat)
    s, d, C, mu0 = _params(f, omega, C, mu0)
    n1, n2 = f.shape
    n = max(n1, n2)
    r = f.rank
    Z = f.U @ X.T + Y_mat @ f.V.T
    c1, c2 = coherence_coefficients(X, Y_mat, mu0, r, n1, n2)
    Zt = Z - s * project_T(project_omega(Z, omega), f)
    Xt, Yt = tangent_split(Zt, f)
    alpha = C * mu0 * r / math.sqrt(d)
    base = mu0 * r / n

    def check(lhs, rhs):
        return InequalityCheck(float(lhs), float(rhs), bool(lhs <= rhs + SLACK))

    return Lemma3Report(
        inf_norm=check(np.max(np.abs(Zt)), (c1 + c2) * base * (delta_d + alpha)),
        x_rows=check(np.max(np.sum(Xt * Xt, axis=1)), base * (delta_d * c1 + 2.0 * c2 * alpha) ** 2),
        y_rows=check(np.max(np.sum(Yt * Yt, axis=1)), base * (delta_d * c2 + (c1 + c2) * alpha) ** 2),
        c1=c1,
        c2=c2,
    )
