import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from helpers import random_orthonormal
from univmc.core import (
    LowRankFactor,
    SampleSet,
    as_matrix,
    best_rank_k,
    frobenius_norm,
    inf_norm,
    nuclear_norm,
    project_omega,
    project_T,
    project_T_perp,
    spectral_norm,
    svd,
)
from univmc.errors import InvalidArgumentError

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def random_factor(n1, n2, r, seed=0):
    rng = np.random.default_rng(seed)
    return LowRankFactor.from_orthonormal(random_orthonormal(n1, r, rng), random_orthonormal(n2, r, rng))


# ---- matrices and sample sets ----

def test_as_matrix_rejects_nonfinite_and_bad_shapes():
    with pytest.raises(InvalidArgumentError):
        as_matrix([[1.0, np.nan]])
    with pytest.raises(InvalidArgumentError):
        as_matrix([1.0, 2.0])
    with pytest.raises(InvalidArgumentError):
        as_matrix(np.zeros((0, 3)))


def test_sample_set_degrees_and_validation():
    om = SampleSet(3, 4, np.array([[0, 0], [0, 3], [2, 1]]))
    assert om.row_degrees.tolist() == [2, 0, 1]
    assert om.col_degrees.tolist() == [1, 1, 0, 1]
    assert om.row_degrees.sum() == om.size == 3
    assert not om.is_regular
    with pytest.raises(InvalidArgumentError):
        SampleSet(2, 2, np.array([[0, 0], [0, 0]]))
    with pytest.raises(InvalidArgumentError):
        SampleSet(2, 2, np.array([[2, 0]]))
    with pytest.raises(InvalidArgumentError):
        SampleSet(2, 2, np.array([[-1, 0]]))


def test_sample_set_mask_round_trip_and_equality():
    rng = np.random.default_rng(0)
    mask = rng.random((6, 5)) < 0.4
    om = SampleSet.from_mask(mask)
    assert np.array_equal(om.mask(), mask)
    assert om == SampleSet(6, 5, om.edges[::-1].copy())
    assert hash(om) == hash(SampleSet.from_mask(mask))
    full = SampleSet.complete(3, 3)
    assert full.is_regular and full.degree == 3 and full.scale == 1.0


# ---- svd ----

def test_svd_diagonal_example():
    res = svd(np.diag([3.0, 1.0]), 1)
    assert res.factor.sigma.tolist() == [3.0]
    assert res.residual_norm == pytest.approx(1.0, abs=1e-14)


def test_svd_zero_matrix():
    res = svd(np.zeros((5, 5)), 2)
    assert np.all(res.factor.sigma == 0.0)
    assert res.residual_norm == 0.0


def test_svd_full_rank_reconstruction():
    A = np.random.default_rng(1).standard_normal((20, 20))
    res = svd(A, 20)
    assert res.residual_norm <= 1e-8 * np.linalg.norm(A)
    assert np.max(np.abs(res.factor.matrix() - A)) <= 1e-8


def test_svd_rejects_bad_rank():
    with pytest.raises(InvalidArgumentError):
        svd(np.eye(3), 0)
    with pytest.raises(InvalidArgumentError):
        svd(np.eye(3), 4)


def test_svd_residual_matches_eckart_young_and_is_monotone():
    A = np.random.default_rng(2).standard_normal((12, 9))
    s = np.linalg.svd(A, compute_uv=False)
    res = [svd(A, k).residual_norm for k in range(1, 10)]
    for k, rk in enumerate(res, start=1):
        assert rk == pytest.approx(math.sqrt(np.sum(s[k:] ** 2)), abs=1e-10)
    assert all(b <= a + 1e-12 for a, b in zip(res, res[1:]))


def test_best_rank_k_has_rank_k():
    A = np.random.default_rng(3).standard_normal((10, 8))
    B = best_rank_k(A, 3)
    assert np.linalg.matrix_rank(B, tol=1e-9) == 3


def test_low_rank_factor_validation():
    with pytest.raises(InvalidArgumentError):
        LowRankFactor.from_orthonormal(np.ones((4, 1)), np.ones((4, 1)) / 2)
    with pytest.raises(InvalidArgumentError):
        LowRankFactor.from_orthonormal(np.zeros((4, 0)), np.zeros((4, 0)))
    U = np.eye(4)[:, :2]
    with pytest.raises(InvalidArgumentError):
        LowRankFactor(U, np.array([1.0, 2.0]), U)
    with pytest.raises(InvalidArgumentError):
        LowRankFactor(U, np.array([1.0, -1.0]), U)


# ---- projections ----

def test_project_omega_examples():
    A = np.array([[1.0, 2.0], [3.0, 4.0]])
    om = SampleSet(2, 2, np.array([[0, 0], [1, 1]]))
    assert project_omega(A, om).tolist() == [[1.0, 0.0], [0.0, 4.0]]
    assert np.array_equal(project_omega(A, SampleSet.complete(2, 2)), A)
    assert not np.any(project_omega(np.zeros((2, 2)), om))
    with pytest.raises(InvalidArgumentError):
        project_omega(np.zeros((3, 2)), om)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (5, 4), elements=finite), st.integers(0, 2**20))
def test_project_omega_idempotent_contraction(A, seed):
    om = SampleSet.from_mask(np.random.default_rng(seed).random((5, 4)) < 0.5)
    P = project_omega(A, om)
    assert np.array_equal(project_omega(P, om), P)
    assert np.linalg.norm(P) <= np.linalg.norm(A) + 1e-12


def test_project_T_fixed_points():
    f = random_factor(8, 6, 2)
    W = f.sign_matrix()
    assert np.allclose(project_T(W, f), W, atol=1e-12)
    assert np.allclose(project_T_perp(W, f), 0.0, atol=1e-12)
    rng = np.random.default_rng(4)
    Zp = (np.eye(8) - f.U @ f.U.T) @ rng.standard_normal((8, 6)) @ (np.eye(6) - f.V @ f.V.T)
    assert np.allclose(project_T(Zp, f), 0.0, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**20))
def test_tangent_projection_properties(seed):
    rng = np.random.default_rng(seed)
    f = random_factor(7, 5, 2, seed)
    Z, W = rng.standard_normal((7, 5)), rng.standard_normal((7, 5))
    PZ = project_T(Z, f)
    assert np.linalg.norm(project_T(PZ, f) - PZ) <= 1e-10 * np.linalg.norm(Z)
    assert np.linalg.norm(PZ + project_T_perp(Z, f) - Z) <= 1e-10 * np.linalg.norm(Z)
    assert np.linalg.norm(project_T_perp(PZ, f)) <= 1e-10 * np.linalg.norm(Z)
    lhs, rhs = np.sum(PZ * W), np.sum(Z * project_T(W, f))
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))


def test_project_T_dimension_mismatch():
    with pytest.raises(InvalidArgumentError):
        project_T(np.zeros((3, 3)), random_factor(4, 4, 1))


# ---- norms ----

def test_norms_diagonal_and_zero():
    A = np.diag([3.0, 1.0])
    assert spectral_norm(A) == pytest.approx(3.0)
    assert frobenius_norm(A) == pytest.approx(math.sqrt(10.0))
    assert nuclear_norm(A) == pytest.approx(4.0)
    assert inf_norm(A) == 3.0
    Z = np.zeros((3, 2))
    assert spectral_norm(Z) == frobenius_norm(Z) == nuclear_norm(Z) == inf_norm(Z) == 0.0


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (15, 10), elements=finite))
def test_norm_ordering(A):
    nuc, fro, spec = nuclear_norm(A), frobenius_norm(A), spectral_norm(A)
    tol = 1e-9 * max(1.0, nuc)
    assert nuc + tol >= fro and fro + tol >= spec
