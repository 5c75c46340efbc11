"""The compiled extension and the numpy fallback must agree."""

import numpy as np
import pytest

from hebbflow import _fallback

compiled = pytest.importorskip("hebbflow._kernels")


def test_uniform_streams_bit_identical():
    a, ua = compiled.fill_uniform(987, 11, 64)
    b, ub = _fallback.fill_uniform(987, 11, 64)
    assert ua == ub
    assert np.array_equal(a, b)


def test_normal_streams_agree():
    a, _ = compiled.fill_normal(55, 2, 33)
    b, _ = _fallback.fill_normal(55, 2, 33)
    assert np.abs(a - b).max() <= 1e-12


def test_jacobi_agreement():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((12, 12))
    A = A + A.T
    wa, Qa = compiled.jacobi_eig(A)
    wb, Qb = _fallback.jacobi_eig(A)
    assert np.abs(wa - wb).max() <= 1e-10
    # eigenvectors may differ by sign; compare reconstructions
    assert np.abs(Qa @ np.diag(wa) @ Qa.T - Qb @ np.diag(wb) @ Qb.T).max() <= 1e-10


def test_hebb_kernels_agree():
    rng = np.random.default_rng(1)
    W = rng.standard_normal((3, 6))
    X = rng.standard_normal((50, 6))
    assert np.abs(compiled.hebb_trace(W, X) - _fallback.hebb_trace(W, X)).max() <= 1e-12
    assert np.abs(compiled.hebb_ordered(W, X) - _fallback.hebb_ordered(W, X)).max() <= 1e-12


def test_pairwise_and_spiral_agree():
    rng = np.random.default_rng(2)
    X = rng.standard_normal((40, 3))
    assert np.abs(compiled.pairwise_dist(X) - _fallback.pairwise_dist(X)).max() <= 1e-12
    p2d = rng.uniform(-10, 10, (40, 2))
    ta = compiled.spiral_project(p2d, 4.7, 14.1, 128, 5)
    tb = _fallback.spiral_project(p2d, 4.7, 14.1, 128, 5)
    assert np.abs(ta - tb).max() <= 1e-10
