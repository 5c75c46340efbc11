import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hebbflow.errors import DegenerateLabelsError
from hebbflow.metrics import (
    MetricsRecord,
    SpectralReference,
    effective_rank,
    grad_W,
    grad_X,
    joint_energy,
    latent_covariance,
    linear_probe,
    lyapunov,
    lyapunov_rate,
    noise_projection,
    ortho_error,
    stationarity_residual,
    subspace_angle,
)
from hebbflow.numerics import SeededRng, gauss_matrix


def random_ref(n, m, seed=0):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    sigma = A @ A.T / n
    return SpectralReference.from_sigma(sigma, m)


def test_joint_energy_special_cases():
    X = np.random.default_rng(0).standard_normal((5, 3))
    assert joint_energy(X, np.zeros((2, 3)), 2.0) == pytest.approx(0.5)
    W = np.zeros((2, 3))
    W[0, 0] = 1.0
    assert joint_energy(np.zeros((4, 3)), W, 3.0) == pytest.approx(0.0)


def test_joint_energy_matches_loop():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((5, 3))
    W = rng.standard_normal((2, 3))
    lam = 0.7
    per_sample = -np.mean([np.linalg.norm(W @ x) ** 2 for x in X]) / 2
    expected = per_sample + lam / 4 * (np.linalg.norm(W) ** 2 - 1) ** 2
    assert joint_energy(X, W, lam) == pytest.approx(expected, abs=1e-14)


def test_gradients_zero_weight():
    X = np.random.default_rng(2).standard_normal((6, 4))
    assert np.abs(grad_X(X, np.zeros((2, 4)))).max() == 0.0
    assert np.abs(grad_W(X, np.zeros((2, 4)), 1.0)).max() == 0.0


@pytest.mark.parametrize("seed", range(10))
def test_gradients_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((4, 3))
    W = rng.standard_normal((2, 3))
    lam, h = 0.9, 1e-5
    gx, gw = grad_X(X, W), grad_W(X, W, lam)
    for idx in np.ndindex(X.shape):
        Xp, Xm = X.copy(), X.copy()
        Xp[idx] += h
        Xm[idx] -= h
        fd = (joint_energy(Xp, W, lam) - joint_energy(Xm, W, lam)) / (2 * h)
        assert abs(gx[idx] - fd) <= 1e-6
    for idx in np.ndindex(W.shape):
        Wp, Wm = W.copy(), W.copy()
        Wp[idx] += h
        Wm[idx] -= h
        fd = (joint_energy(X, Wp, lam) - joint_energy(X, Wm, lam)) / (2 * h)
        assert abs(gw[idx] - fd) <= 1e-6


def test_euler_descent_monotone():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((20, 3))
    W = 0.5 * rng.standard_normal((2, 3))
    lam, step = 1.0, 1e-3
    e_prev = joint_energy(X, W, lam)
    for _ in range(100):
        X = X - step * grad_X(X, W)
        W = W - step * grad_W(X, W, lam)
        e = joint_energy(X, W, lam)
        assert e <= e_prev + 1e-12
        e_prev = e


def test_lyapunov_values():
    W = np.array([[1.0, 0.0]])
    assert lyapunov(W) == 0.0
    assert lyapunov_rate(W, np.eye(2), 1.0) == 0.0
    assert lyapunov(np.zeros((1, 2))) == pytest.approx(0.25)
    assert lyapunov_rate(np.zeros((1, 2)), np.eye(2), 1.0) == 0.0


def test_lyapunov_rate_never_positive_bulk():
    rng = np.random.default_rng(4)
    for _ in range(10000):
        m, n = rng.integers(1, 4), rng.integers(2, 6)
        W = rng.standard_normal((m, n))
        A = rng.standard_normal((n, n))
        assert lyapunov_rate(W, A @ A.T, float(rng.uniform(0.1, 3))) <= 0.0


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_lyapunov_rate_never_positive_property(seed):
    rng = np.random.default_rng(seed)
    W = rng.standard_normal((2, 4))
    A = rng.standard_normal((4, 4))
    assert lyapunov_rate(W, A @ A.T, 1.0) <= 0.0


def test_latent_covariance_identities():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((30, 4))
    W = rng.standard_normal((2, 4))
    sy = latent_covariance(X, W)
    Y = X @ W.T
    assert np.abs(sy - Y.T @ Y / 30).max() <= 1e-12
    sigma = X.T @ X / 30
    assert np.abs(sy - W @ sigma @ W.T).max() <= 1e-12
    assert np.abs(latent_covariance(X, np.zeros((2, 4)))).max() == 0.0


def test_latent_covariance_diagonal_at_eigenrows():
    rng = np.random.default_rng(6)
    X = rng.standard_normal((200, 5))
    ref = SpectralReference.from_sigma(X.T @ X / 200, 2)
    sy = latent_covariance(X, ref.principal.T)
    off = sy - np.diag(np.diag(sy))
    assert np.abs(off).max() <= 1e-10
    assert np.abs(np.diag(sy) - ref.eigenvalues[:2]).max() <= 1e-10


def test_ortho_error_values():
    assert ortho_error(np.diag([2.0, 1.0])) == 0.0
    assert ortho_error(np.array([[5.0]])) == 0.0
    assert ortho_error(np.ones((2, 2))) == pytest.approx(np.sqrt(2) / 2)
    assert ortho_error(np.zeros((3, 3))) == 0.0


def test_effective_rank_values():
    assert effective_rank(np.eye(4)) == pytest.approx(4.0)
    v = np.array([[1.0, 0.0], [0.0, 0.0]])
    assert effective_rank(v) == pytest.approx(1.0)
    assert effective_rank(np.diag([3.0, 1.0])) == pytest.approx(1.6)
    assert effective_rank(np.zeros((2, 2))) == 0.0


def test_subspace_angle_extremes():
    ref = random_ref(5, 2, seed=7)
    assert subspace_angle(ref.principal.T, ref) <= 1e-10
    assert subspace_angle(ref.complement[:, :2].T, ref) >= 1.0 - 1e-10


def test_subspace_angle_planted_rotation():
    ref = random_ref(6, 2, seed=8)
    theta = 0.3
    # rotate the second principal direction into the first complement axis
    q2, c1 = ref.principal[:, 1], ref.complement[:, 0]
    W = np.vstack([ref.principal[:, 0], np.cos(theta) * q2 + np.sin(theta) * c1])
    assert subspace_angle(W, ref) == pytest.approx(np.sin(theta), abs=1e-10)


def test_subspace_angle_rank_deficient_warns():
    ref = random_ref(4, 2, seed=9)
    W = np.vstack([ref.principal[:, 0], ref.principal[:, 0]])
    with pytest.warns(RuntimeWarning):
        assert subspace_angle(W, ref) == 1.0


def test_noise_projection_values():
    ref = random_ref(5, 2, seed=10)
    assert noise_projection(ref.principal.T, ref) <= 1e-12
    single = SpectralReference.from_sigma(ref.sigma, 1)
    w = single.complement[:, 0][None, :]
    assert noise_projection(w, single) == pytest.approx(1.0, abs=1e-12)


def test_noise_projection_pythagoras():
    rng = np.random.default_rng(11)
    ref = random_ref(6, 3, seed=11)
    W = rng.standard_normal((3, 6))
    lhs = noise_projection(W, ref)
    rhs = np.sqrt(np.linalg.norm(W) ** 2 - np.linalg.norm(W @ ref.principal) ** 2)
    assert abs(lhs - rhs) <= 1e-12


def test_stationarity_residual():
    ref = random_ref(5, 2, seed=12)
    assert stationarity_residual(ref.principal.T, ref.sigma) <= 1e-10
    rng = np.random.default_rng(13)
    assert stationarity_residual(rng.standard_normal((2, 5)), ref.sigma) > 1e-3


def test_metric_invariance_under_reference_rotation():
    rng = np.random.default_rng(14)
    X = rng.standard_normal((100, 5))
    W = rng.standard_normal((2, 5))
    ref = SpectralReference.from_sigma(X.T @ X / 100, 2)
    R = ref.basis  # orthogonal basis change
    Xr, Wr = X @ R, W @ R
    ref_r = SpectralReference.from_sigma(Xr.T @ Xr / 100, 2)
    pairs = [
        (ortho_error(latent_covariance(X, W)), ortho_error(latent_covariance(Xr, Wr))),
        (effective_rank(latent_covariance(X, W)), effective_rank(latent_covariance(Xr, Wr))),
        (subspace_angle(W, ref), subspace_angle(Wr, ref_r)),
        (noise_projection(W, ref), noise_projection(Wr, ref_r)),
    ]
    for a, b in pairs:
        assert a == pytest.approx(b, abs=1e-10)


def test_linear_probe_separable_blobs():
    rng = SeededRng(15)
    a = gauss_matrix(rng, 100, 2) + np.array([4.0, 0.0])
    b = gauss_matrix(rng, 100, 2) - np.array([4.0, 0.0])
    Y = np.vstack([a, b])
    labels = np.array([0] * 100 + [1] * 100)
    assert linear_probe(Y, labels, folds=5, seed=0) >= 0.99


def test_linear_probe_chance_under_shuffled_labels():
    rng = SeededRng(16)
    Y = gauss_matrix(rng, 400, 3)
    labels = np.array([0, 1] * 200)
    acc = linear_probe(Y, labels, folds=5, seed=0)
    assert abs(acc - 0.5) <= 0.05


def test_linear_probe_degenerate_labels():
    with pytest.raises(DegenerateLabelsError):
        linear_probe(np.zeros((60, 2)), np.zeros(60, dtype=int), folds=5)


def test_metrics_record_csv_roundtrip():
    rec = MetricsRecord(5, 0.1, -0.01, -2.0, 0.9, 0.2, 0.3, 1.5, 0.05, np.array([2.0, 1.0]))
    header = MetricsRecord.csv_header(2)
    assert header.endswith("latent_eig_1,latent_eig_2")
    row = rec.csv_row()
    assert row.split(",")[0] == "5"
    assert len(row.split(",")) == len(header.split(","))
