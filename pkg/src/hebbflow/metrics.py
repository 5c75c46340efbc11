"""Energy, Lyapunov, and spectral-alignment diagnostics, plus the linear
separability probe. These are the quantities reported per run; column
order of the CSV serialization is fixed and consumed by the plotting
frontend.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLabelsError, DimensionError, SymmetryError
from .numerics import SeededRng, sym_eig

RANK_RTOL = 1e-10
PROBE_L2 = 1e-3
PROBE_EPOCHS = 500


def joint_energy(X: np.ndarray, W: np.ndarray, lambda_reg: float) -> float:
    """-(1/2N) Tr(X W^T W X^T) + (lambda/4)(||W||_F^2 - 1)^2."""
    N = X.shape[0]
    Y = X @ W.T
    quad = float((Y * Y).sum()) / (2.0 * N)
    cap = float((W * W).sum()) - 1.0
    return -quad + 0.25 * lambda_reg * cap * cap


def grad_X(X: np.ndarray, W: np.ndarray) -> np.ndarray:
    """-(1/N) X W^T W."""
    return -(X @ (W.T @ W)) / X.shape[0]


def grad_W(X: np.ndarray, W: np.ndarray, lambda_reg: float) -> np.ndarray:
    """-(1/N) W X^T X + lambda (||W||_F^2 - 1) W."""
    N = X.shape[0]
    cap = float((W * W).sum()) - 1.0
    return -((X @ W.T).T @ X) / N + lambda_reg * cap * W


def lyapunov(W: np.ndarray) -> float:
    """V = (1/4)(||W||_F^2 - 1)^2."""
    cap = float((W * W).sum()) - 1.0
    return 0.25 * cap * cap


def lyapunov_rate(W: np.ndarray, sigma: np.ndarray, gamma: float) -> float:
    """dV/dtau along the averaged flow:
    -gamma * Tr(W Sigma W^T) (||W||_F^2 - 1)^2, never positive.

    The prefactor is the bare plasticity rate: the chain rule gives
    dV = (||W||^2 - 1) Tr(W^T dW) and the inhibition factorizes the rest;
    verified against the numerically differentiated flow.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    scale = np.linalg.norm(sigma)
    if scale > 0 and np.linalg.norm(sigma - sigma.T) > 1e-10 * scale:
        raise SymmetryError("covariance must be symmetric")
    cap = float((W * W).sum()) - 1.0
    projected = float(np.trace(W @ sigma @ W.T))
    return -gamma * projected * cap * cap


def latent_covariance(X: np.ndarray, W: np.ndarray) -> np.ndarray:
    """(1/N) Y^T Y with Y = X W^T; equals W Sigma_hat W^T identically."""
    Y = X @ W.T
    return (Y.T @ Y) / X.shape[0]


def ortho_error(sigma_y: np.ndarray) -> float:
    """Normalized off-diagonal energy ||offdiag|| / ||full||, in [0, 1];
    zero for 1x1 or all-zero input."""
    sigma_y = np.asarray(sigma_y, dtype=np.float64)
    total = np.linalg.norm(sigma_y)
    if sigma_y.shape[0] <= 1 or total == 0.0:
        return 0.0
    off = sigma_y - np.diag(np.diag(sigma_y))
    return float(np.linalg.norm(off) / total)


def effective_rank(sigma_y: np.ndarray) -> float:
    """Participation ratio (sum lam)^2 / sum lam^2 of the latent spectrum;
    0 for the zero matrix."""
    lam = sym_eig(np.asarray(sigma_y, dtype=np.float64)).eigenvalues
    lam = np.clip(lam, 0.0, None)
    s2 = float((lam * lam).sum())
    if s2 == 0.0:
        return 0.0
    return float(lam.sum() ** 2 / s2)


@dataclass
class SpectralReference:
    """Eigenstructure the run is judged against: full basis Q split into
    the principal block Q_m and its complement."""

    sigma: np.ndarray
    eigenvalues: np.ndarray
    basis: np.ndarray  # n x n orthogonal, columns sorted by eigenvalue
    latent_dim: int

    @property
    def principal(self) -> np.ndarray:
        return self.basis[:, : self.latent_dim]

    @property
    def complement(self) -> np.ndarray:
        return self.basis[:, self.latent_dim :]

    @classmethod
    def from_sigma(cls, sigma: np.ndarray, latent_dim: int) -> "SpectralReference":
        w, Q = sym_eig(np.asarray(sigma, dtype=np.float64))
        return cls(np.asarray(sigma, dtype=np.float64), w, Q, latent_dim)

    @classmethod
    def from_spectrum_manifold(cls, manifold, latent_dim: int) -> "SpectralReference":
        return cls(manifold.covariance(), manifold.eigenvalues.copy(), manifold.basis.copy(), latent_dim)


def _orthonormal_rows(W: np.ndarray) -> tuple[np.ndarray, bool]:
    Q, R = np.linalg.qr(W.T)
    diag = np.abs(np.diag(R))
    deficient = bool(diag.min() <= RANK_RTOL * max(diag.max(), 1e-300))
    return Q, deficient


def subspace_angle(W: np.ndarray, ref: SpectralReference) -> float:
    """Sine of the largest principal angle between row-space(W) and the
    principal eigenspace. Rank-deficient W warns and returns 1."""
    if W.shape[0] != ref.latent_dim:
        raise DimensionError("weight rows must match the reference latent dimension")
    Q, deficient = _orthonormal_rows(W)
    if deficient:
        warnings.warn("weight matrix is numerically rank-deficient; principal angle set to 1", RuntimeWarning)
        return 1.0
    M = ref.principal.T @ Q
    sig2 = sym_eig(M.T @ M).eigenvalues
    smin = np.sqrt(max(0.0, float(sig2.min())))
    return float(np.sqrt(max(0.0, 1.0 - smin * smin)))


def noise_projection(W: np.ndarray, ref: SpectralReference) -> float:
    """||W Q_perp||_F: weight mass outside the principal eigenspace."""
    return float(np.linalg.norm(W @ ref.complement))


def stationarity_residual(W: np.ndarray, sigma: np.ndarray) -> float:
    """||W Sigma - Gamma_hat W||_F with Gamma_hat = diag(W Sigma W^T), the
    best diagonal fit to the stationary eigen-equation."""
    WS = W @ sigma
    gamma_hat = np.diag(np.diag(WS @ W.T))
    return float(np.linalg.norm(WS - gamma_hat @ W))


# --- linear separability probe ------------------------------------------


def _stratified_folds(labels: np.ndarray, folds: int, rng: SeededRng) -> np.ndarray:
    """Fold index per sample; every class is spread round-robin across folds
    after a seeded shuffle."""
    assignment = np.empty(labels.shape[0], dtype=np.int64)
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        order = np.argsort(rng.uniform(idx.size), kind="stable")
        assignment[idx[order]] = np.arange(idx.size) % folds
    return assignment


def _fit_logistic_ovr(X: np.ndarray, labels: np.ndarray, classes: np.ndarray) -> np.ndarray:
    """One-vs-rest logistic regression by full-batch gradient descent with
    a fixed epoch budget. Returns (n_classes, d+1) weights incl. bias."""
    n, d = X.shape
    Xb = np.column_stack([X, np.ones(n)])
    lr = 1.0 / (0.25 * float((Xb * Xb).sum(axis=1).mean()) + PROBE_L2)
    weights = np.zeros((classes.size, d + 1))
    for ci, cls in enumerate(classes):
        t = (labels == cls).astype(np.float64)
        w = np.zeros(d + 1)
        for _ in range(PROBE_EPOCHS):
            p = 1.0 / (1.0 + np.exp(-np.clip(Xb @ w, -500, 500)))
            g = Xb.T @ (p - t) / n + PROBE_L2 * w
            w -= lr * g
        weights[ci] = w
    return weights


def linear_probe(Y: np.ndarray, labels: np.ndarray, folds: int = 5, seed: int = 0) -> float:
    """Mean held-out accuracy of a linear one-vs-rest logistic probe over
    stratified folds. Features are standardized per training fold."""
    Y = np.asarray(Y, dtype=np.float64)
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if classes.size < 2:
        raise DegenerateLabelsError("need at least two classes")
    if Y.shape[0] < 10 * folds:
        raise DimensionError(f"need at least {10 * folds} samples for {folds} folds")
    fold_of = _stratified_folds(labels, folds, SeededRng(seed))
    accs = []
    for f in range(folds):
        train, test = fold_of != f, fold_of == f
        mu = Y[train].mean(axis=0)
        sd = Y[train].std(axis=0)
        sd[sd == 0] = 1.0
        Xtr, Xte = (Y[train] - mu) / sd, (Y[test] - mu) / sd
        weights = _fit_logistic_ovr(Xtr, labels[train], classes)
        scores = np.column_stack([Xte, np.ones(Xte.shape[0])]) @ weights.T
        pred = classes[np.argmax(scores, axis=1)]
        accs.append(float((pred == labels[test]).mean()))
    return float(np.mean(accs))


# --- per-step record ------------------------------------------------------


@dataclass
class MetricsRecord:
    step: int
    V: float
    dV: float
    E: float
    frob_W: float
    sin_theta: float
    ortho_error: float
    eff_rank: float
    noise_proj: float
    latent_eigs: np.ndarray

    @staticmethod
    def csv_header(latent_dim: int) -> str:
        eigs = ",".join(f"latent_eig_{i + 1}" for i in range(latent_dim))
        return f"step,V,dV,E,frob_W,sin_theta,ortho_error,eff_rank,noise_proj,{eigs}"

    def csv_row(self) -> str:
        head = [
            str(self.step),
            repr(self.V),
            repr(self.dV),
            repr(self.E),
            repr(self.frob_W),
            repr(self.sin_theta),
            repr(self.ortho_error),
            repr(self.eff_rank),
            repr(self.noise_proj),
        ]
        return ",".join(head + [repr(float(v)) for v in self.latent_eigs])

    SCALAR_FIELDS = ("V", "dV", "E", "frob_W", "sin_theta", "ortho_error", "eff_rank", "noise_proj")


def compute_record(
    step: int,
    X: np.ndarray,
    W: np.ndarray,
    lambda_reg: float,
    ref: SpectralReference,
    dV: float,
) -> MetricsRecord:
    sigma_y = latent_covariance(X, W)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        sin_t = subspace_angle(W, ref)
    return MetricsRecord(
        step=step,
        V=lyapunov(W),
        dV=dV,
        E=joint_energy(X, W, lambda_reg),
        frob_W=float(np.linalg.norm(W)),
        sin_theta=sin_t,
        ortho_error=ortho_error(sigma_y),
        eff_rank=effective_rank(sigma_y),
        noise_proj=noise_projection(W, ref),
        latent_eigs=sym_eig(sigma_y).eigenvalues,
    )
