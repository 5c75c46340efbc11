"""The coupled slow-fast integrator: overdamped Langevin kinematics with
nearest-point retraction, Hebbian plasticity on the post-move swarm, the
averaged mean-field weight ODE, and its closed-form component-ratio
oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import backend
from .errors import DimensionError, SymmetryError
from .geometry import Swarm
from .numerics import SeededRng

WEIGHT_NORM_GUARD = 1e6
LYAPUNOV_GUARD = 1e12

STATUS_OK = "completed"
STATUS_DIVERGED = "explosive divergence"


@dataclass
class DynamicsConfig:
    eta_x: float = 4e-4
    eta_w: float = 4e-5
    diffusion: float = 0.5
    beta: float = 1.0
    gamma: float = 1.0
    lambda_reg: float = 1.0
    steps: int = 15000
    plasticity: str = "ordered"  # "ordered" (deflation) or "trace" (scalar inhibition)

    def __post_init__(self):
        for name in ("eta_x", "eta_w", "diffusion", "beta", "gamma", "lambda_reg"):
            if getattr(self, name) < 0:
                raise DimensionError(f"{name} must be non-negative")
        if self.steps < 0:
            raise DimensionError("steps must be non-negative")
        if self.plasticity not in ("ordered", "trace"):
            raise DimensionError(f"unknown plasticity rule {self.plasticity!r}")

    @property
    def timescale_ratio(self) -> float:
        return self.eta_w / self.eta_x if self.eta_x > 0 else np.inf


def init_weights(latent_dim: int, ambient_dim: int, rng: SeededRng, scale: float = 0.1) -> np.ndarray:
    """Small random start; scale is the approximate Frobenius norm."""
    W = rng.normal(latent_dim * ambient_dim).reshape(latent_dim, ambient_dim)
    return scale * W / np.sqrt(latent_dim * ambient_dim)


def langevin_step(swarm: Swarm, W: np.ndarray, cfg: DynamicsConfig, rng: SeededRng) -> tuple[Swarm, int]:
    """One Euler-Maruyama move of every agent, retracted to the manifold.

    Returns the new swarm and the count of agents that kept their previous
    position because the retraction produced a non-finite point.
    """
    X = swarm.positions
    if W.shape[1] != X.shape[1]:
        raise DimensionError(f"weights act on R^{W.shape[1]} but agents live in R^{X.shape[1]}")
    if cfg.eta_x == 0.0 or cfg.diffusion == 0.0:
        # drift and noise both vanish; skip the retraction so agents are
        # bitwise unchanged (chart retractions wobble at rounding level)
        return swarm, 0
    drift = cfg.eta_x * cfg.diffusion * cfg.beta * (X @ (W.T @ W))
    noise_scale = np.sqrt(2.0 * cfg.diffusion * cfg.eta_x)
    noise = noise_scale * rng.normal(X.size).reshape(X.shape)
    moved = X + drift + noise
    if swarm.manifold.free:
        return Swarm(moved, swarm.manifold), 0
    projected = swarm.manifold.project(moved)
    bad = ~np.isfinite(projected).all(axis=1)
    incidents = int(bad.sum())
    if incidents:
        projected[bad] = X[bad]
    return Swarm(projected, swarm.manifold), incidents


def oja_update(W: np.ndarray, swarm, eta_w: float) -> np.ndarray:
    """Swarm-averaged Hebbian step with scalar inhibition:
    W + eta * (1/N) sum_i [(W x_i) x_i^T - ||W x_i||^2 W]."""
    X = swarm.positions if isinstance(swarm, Swarm) else np.asarray(swarm, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise DimensionError("need at least one agent")
    if W.shape[1] != X.shape[1]:
        raise DimensionError("incompatible dimensions")
    return W + eta_w * backend.hebb_trace(np.ascontiguousarray(W), np.ascontiguousarray(X))


def sanger_update(W: np.ndarray, swarm, eta_w: float) -> np.ndarray:
    """Hebbian step with scaled lower-triangular deflation:
    W + eta * [(1/N) Y^T X - m tril(Y^T Y / N) W].

    Identical to ``oja_update`` for a single latent row; for m > 1 the
    deflation breaks the rotational degeneracy of the scalar rule so rows
    settle on distinct principal axes with total Frobenius norm 1.
    """
    X = swarm.positions if isinstance(swarm, Swarm) else np.asarray(swarm, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise DimensionError("need at least one agent")
    if W.shape[1] != X.shape[1]:
        raise DimensionError("incompatible dimensions")
    return W + eta_w * backend.hebb_ordered(np.ascontiguousarray(W), np.ascontiguousarray(X))


def plasticity_step(W: np.ndarray, X: np.ndarray, cfg: DynamicsConfig) -> np.ndarray:
    if cfg.eta_w == 0.0:
        return W.copy()
    if cfg.plasticity == "trace":
        return oja_update(W, X, cfg.eta_w)
    return sanger_update(W, X, cfg.eta_w)


def coupled_step(swarm: Swarm, W: np.ndarray, cfg: DynamicsConfig, rng: SeededRng) -> tuple[Swarm, np.ndarray, int]:
    """Fast kinematics then slow plasticity; the Hebbian accumulator sees
    the post-move positions."""
    moved, incidents = langevin_step(swarm, W, cfg, rng)
    W_new = plasticity_step(W, moved.positions, cfg)
    return moved, W_new, incidents


def averaged_rhs(W: np.ndarray, sigma: np.ndarray, gamma: float) -> np.ndarray:
    """gamma * (W Sigma - Tr(W Sigma W^T) W), the mean-field weight flow."""
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1] or sigma.shape[0] != W.shape[1]:
        raise DimensionError(f"covariance shape {sigma.shape} incompatible with weights {W.shape}")
    scale = np.linalg.norm(sigma)
    if scale > 0 and np.linalg.norm(sigma - sigma.T) > 1e-10 * scale:
        raise SymmetryError("covariance must be symmetric")
    WS = W @ sigma
    return gamma * (WS - np.trace(WS @ W.T) * W)


def closed_form_ratio(c_k0: float, c_j0: float, lam_j: float, lam_k: float, gamma: float, tau: float) -> float:
    """(c_k0 / c_j0) * exp(-gamma (lam_j - lam_k) tau): the exact ratio of a
    slow component to a fast one under the averaged flow; the shared
    nonlinear inhibition cancels in the quotient."""
    if c_j0 == 0:
        raise ZeroDivisionError("reference component must be non-zero (measure-zero initialization)")
    return (c_k0 / c_j0) * np.exp(-gamma * (lam_j - lam_k) * tau)


def integrate_averaged(
    W0: np.ndarray,
    sigma: np.ndarray,
    gamma: float,
    tau_end: float,
    dt: float = 1e-3,
    record_every: int | None = None,
):
    """Classical RK4 for the averaged flow. Returns the final W, or
    (taus, Ws) when record_every is given."""
    W = np.array(W0, dtype=np.float64, copy=True)
    full = int(np.floor(tau_end / dt + 1e-12))
    remainder = tau_end - full * dt
    taus, traj = [0.0], [W.copy()]

    def rk4(W, h):
        k1 = averaged_rhs(W, sigma, gamma)
        k2 = averaged_rhs(W + 0.5 * h * k1, sigma, gamma)
        k3 = averaged_rhs(W + 0.5 * h * k2, sigma, gamma)
        k4 = averaged_rhs(W + h * k3, sigma, gamma)
        return W + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)

    for k in range(full):
        W = rk4(W, dt)
        if record_every and (k + 1) % record_every == 0:
            taus.append((k + 1) * dt)
            traj.append(W.copy())
    if remainder > 1e-15:
        # land exactly on tau_end; a short final step keeps the
        # closed-form ratio oracle sharp
        W = rk4(W, remainder)
        if record_every:
            taus.append(tau_end)
            traj.append(W.copy())
    if record_every:
        return np.array(taus), traj
    return W


@dataclass
class RunTrace:
    """Per-step Lyapunov trajectory plus the final state of a coupled run."""

    swarm: Swarm
    weights: np.ndarray
    lyapunov: np.ndarray  # V after every completed step
    status: str = STATUS_OK
    halted_at: int | None = None
    projection_incidents: int = 0

    @property
    def lyapunov_steps(self) -> np.ndarray:
        """Per-step differences V_{k+1} - V_k (first entry vs the initial V)."""
        return np.diff(self.lyapunov)


def lyapunov_value(W: np.ndarray) -> float:
    q = float((W * W).sum()) - 1.0
    return 0.25 * q * q


def run_coupled(
    swarm: Swarm,
    W0: np.ndarray,
    cfg: DynamicsConfig,
    rng: SeededRng,
    on_step=None,
) -> RunTrace:
    """Run ``cfg.steps`` coupled steps with the divergence guard.

    A run that trips the guard (||W||_F or V beyond bounds) halts and is
    labeled rather than raised: runaway growth is a measured phase.
    ``on_step(k, swarm, W)`` fires after every completed step.
    """
    W = np.array(W0, dtype=np.float64, copy=True)
    V = np.empty(cfg.steps + 1)
    V[0] = lyapunov_value(W)
    incidents = 0
    status, halted = STATUS_OK, None
    for k in range(cfg.steps):
        swarm, W, inc = coupled_step(swarm, W, cfg, rng)
        incidents += inc
        V[k + 1] = lyapunov_value(W)
        if on_step is not None:
            on_step(k, swarm, W)
        frob2 = float((W * W).sum())
        if not np.isfinite(frob2) or frob2 > WEIGHT_NORM_GUARD**2 or V[k + 1] > LYAPUNOV_GUARD:
            status, halted = STATUS_DIVERGED, k + 1
            V = V[: k + 2]
            break
    return RunTrace(swarm, W, V, status, halted, incidents)


def frozen_weights_config(cfg: DynamicsConfig) -> DynamicsConfig:
    return replace(cfg, eta_w=0.0)


def static_swarm_config(cfg: DynamicsConfig) -> DynamicsConfig:
    return replace(cfg, eta_x=0.0, diffusion=0.0)
