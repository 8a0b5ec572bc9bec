import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from univmc.core import SampleSet
from univmc.errors import InvalidArgumentError
from univmc.graphs import (
    BlockModelParams,
    gen_block_model,
    gen_erdos_renyi,
    gen_random_d_regular,
    spectrum,
    trim,
)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 30).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n))), st.integers(0, 2**31))
def test_d_regular_is_exactly_regular(nd, seed):
    n, d = nd
    om = gen_random_d_regular(n, d, seed=seed)
    assert np.all(om.row_degrees == d) and np.all(om.col_degrees == d)
    assert om.size == n * d


def test_d_regular_examples():
    assert gen_random_d_regular(4, 4, seed=0).size == 16
    perm = gen_random_d_regular(5, 1, seed=0)
    assert perm.degree == 1 and np.all(perm.col_degrees == 1)
    assert gen_random_d_regular(20, 5, seed=3) == gen_random_d_regular(20, 5, seed=3)


def test_d_regular_errors():
    with pytest.raises(InvalidArgumentError):
        gen_random_d_regular(4, 5)
    with pytest.raises(InvalidArgumentError):
        gen_random_d_regular(4, 0)


def test_d_regular_large_degree_uses_complement():
    om = gen_random_d_regular(60, 45, seed=1)
    assert om.degree == 45 and om.is_regular


def test_d_regular_near_ramanujan():
    # oracle: dense singular values over 100 seeds
    hits = sum(spectrum(gen_random_d_regular(100, 8, seed=s)).sigma2 <= 2 * math.sqrt(7) + 1.0 for s in range(100))
    assert hits >= 95


def test_d_regular_measured_C_typical():
    cs = [spectrum(gen_random_d_regular(100, 8, seed=s)).measured_C for s in range(20)]
    assert np.median(cs) < 2.0


def test_erdos_renyi_examples():
    assert gen_erdos_renyi(4, 3, 1.0, seed=0).size == 12
    with pytest.raises(InvalidArgumentError):
        gen_erdos_renyi(4, 3, 0.0)
    om = gen_erdos_renyi(200, 200, 0.1, seed=5)
    sd = math.sqrt(40000 * 0.1 * 0.9)
    assert abs(om.size - 4000) <= 4 * sd


def test_trim_regular_unchanged():
    om = gen_random_d_regular(20, 4, seed=0)
    assert trim(om, 1.0) == om
    assert trim(om, 2.0) == om


def test_trim_heavy_row_emptied():
    mask = np.zeros((5, 5), dtype=bool)
    mask[2, :] = True
    mask[0, 0] = True
    out = trim(SampleSet.from_mask(mask), 2.0)
    assert out.row_degrees[2] == 0


def test_trim_rejects_small_factor():
    with pytest.raises(InvalidArgumentError):
        trim(gen_random_d_regular(5, 2, seed=0), 0.5)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.floats(1.0, 3.0))
def test_trim_idempotent(seed, factor):
    rng = np.random.default_rng(seed)
    mask = rng.random((12, 9)) < rng.uniform(0.05, 0.6, size=(12, 1))
    if not mask.any():
        mask[0, 0] = True
    once = trim(SampleSet.from_mask(mask), factor)
    assert trim(once, factor) == once


def test_trim_does_not_increase_C_on_er():
    better = 0
    for s in range(100):
        om = gen_erdos_renyi(500, 500, 0.05, seed=s)
        better += spectrum(trim(om, 2.0)).measured_C <= spectrum(om).measured_C + 1e-12
    assert better >= 90


def test_block_model_examples():
    full = gen_block_model(BlockModelParams(6, 6, 1.0, 1.0))
    assert full.size == 36
    rep = spectrum(gen_block_model(BlockModelParams(6, 6, 1.0, 0.0)))
    assert rep.sigma1 == pytest.approx(rep.sigma2)
    assert rep.relative_gap == pytest.approx(0.0, abs=1e-12)


def test_block_model_odd_split():
    mask = gen_block_model(BlockModelParams(5, 3, 1.0, 0.0)).mask()
    assert mask[:3, :2].all() and mask[3:, 2:].all()
    assert not mask[:3, 2:].any() and not mask[3:, :2].any()


def test_block_model_param_validation():
    with pytest.raises(InvalidArgumentError):
        BlockModelParams(4, 4, 1.5, 0.0)
    with pytest.raises(InvalidArgumentError):
        BlockModelParams(0, 4, 0.5, 0.5)


def test_block_model_gap_trend():
    ps = [0.0, 0.075, 0.15, 0.225, 0.3]
    gaps = []
    for p in ps:
        g = [spectrum(gen_block_model(BlockModelParams(500, 500, p, 0.3 - p, seed=s))).relative_gap
             for s in range(20)]
        gaps.append(np.mean(g))
    assert int(np.argmax(gaps)) == 2
    assert gaps[0] < gaps[1] < gaps[2] and gaps[2] > gaps[3] > gaps[4]


def test_spectrum_examples():
    rep = spectrum(SampleSet.complete(5, 5))
    assert rep.sigma1 == pytest.approx(5.0) and rep.sigma2 == pytest.approx(0.0, abs=1e-12)
    assert rep.relative_gap == pytest.approx(1.0) and rep.ramanujan
    ident = spectrum(SampleSet.from_mask(np.eye(6, dtype=bool)))
    assert ident.sigma1 == pytest.approx(1.0) and ident.sigma2 == pytest.approx(1.0)
    assert ident.relative_gap == pytest.approx(0.0, abs=1e-12)


def test_spectrum_empty_rejected():
    empty = SampleSet(3, 3, np.zeros((0, 2), dtype=np.int64))
    with pytest.raises(InvalidArgumentError):
        spectrum(empty)


@pytest.mark.parametrize("n,d", [(30, 3), (40, 10), (50, 26)])
def test_regular_sigma1_equals_d(n, d):
    rep = spectrum(gen_random_d_regular(n, d, seed=n))
    assert rep.sigma1 == pytest.approx(d, abs=1e-8)
    assert rep.g1_residual <= 1e-12
    assert rep.d == d and rep.is_row_regular and rep.is_col_regular
