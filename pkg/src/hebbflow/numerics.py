"""Deterministic RNG, symmetric eigensolver, and Markov-chain utilities.

Everything here is pure given its inputs. Matrices are plain float64
ndarrays; all tolerances live in the constants below.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import backend
from .errors import ConvergenceError, DimensionError, SymmetryError

SYMMETRY_RTOL = 1e-10
EIG_RESIDUAL_RTOL = 1e-8
ROW_SUM_ATOL = 1e-12
STATIONARY_MAX_ITER = 200_000

# Stream tag for harness-owned selection streams, kept distinct from the
# agent tags 0..N-1 derived by XOR.
SELECTION_STREAM_TAG = 0x9E3779B97F4A7C15


class SymEigResult(NamedTuple):
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # orthogonal columns


class SeededRng:
    """Counter-based splitmix64 stream.

    The k-th 64-bit word of the stream with key ``seed`` is
    ``mix64(seed + (k+1) * 0x9E3779B97F4A7C15)`` with the standard
    splitmix64 finalizer; uniforms take the top 53 bits, normals come from
    the Box-Muller transform on consecutive word pairs. Identical
    (seed, request sizes, call order) therefore reproduce identical streams.
    Instances are single-owner: to fan out across agents, derive one stream
    per agent via :meth:`derive` (seed XOR tag) instead of sharing.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.counter = 0

    def derive(self, tag: int) -> "SeededRng":
        return SeededRng(self.seed ^ (int(tag) & 0xFFFFFFFFFFFFFFFF))

    def uniform(self, count: int) -> np.ndarray:
        vals, used = backend.fill_uniform(self.seed, self.counter, int(count))
        self.counter += used
        return vals

    def normal(self, count: int) -> np.ndarray:
        vals, used = backend.fill_normal(self.seed, self.counter, int(count))
        self.counter += used
        return vals

    def integers(self, upper: int, count: int = 1) -> np.ndarray:
        """Uniform integers in [0, upper). Bias is O(upper / 2**53)."""
        return np.minimum((self.uniform(count) * upper).astype(np.int64), upper - 1)


def gauss_matrix(rng: SeededRng, rows: int, cols: int) -> np.ndarray:
    """(rows, cols) matrix of i.i.d. standard normals from the seeded stream."""
    if rows < 1 or cols < 1:
        raise DimensionError(f"gauss_matrix needs positive dims, got {rows}x{cols}")
    return rng.normal(rows * cols).reshape(rows, cols)


def sym_eig(A: np.ndarray, tol: float = 1e-14) -> SymEigResult:
    """Eigendecomposition of a symmetric matrix (cyclic Jacobi rotations).

    Eigenvalues are returned in descending order with matching eigenvector
    columns; A @ Q == Q @ diag(w) up to EIG_RESIDUAL_RTOL * max(1, ||A||_F).
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"sym_eig needs a square matrix, got shape {A.shape}")
    scale = np.linalg.norm(A)
    if scale > 0:
        asym = np.linalg.norm(A - A.T)
        if asym > SYMMETRY_RTOL * scale:
            raise SymmetryError(f"matrix asymmetry {asym:.3e} exceeds {SYMMETRY_RTOL:.0e} relative")
    w, Q = backend.jacobi_eig(A, tol=tol)
    return SymEigResult(w, Q)


def power_stationary(P: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Unique stationary distribution of a row-stochastic matrix.

    Power iteration from the uniform vector; raises ConvergenceError when
    the chain is reducible (disconnected support) or the iteration stalls.
    """
    P = np.asarray(P, dtype=np.float64)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise DimensionError(f"power_stationary needs a square matrix, got {P.shape}")
    n = P.shape[0]
    rowsum_err = np.abs(P.sum(axis=1) - 1.0).max()
    if rowsum_err > ROW_SUM_ATOL:
        raise DimensionError(f"rows must sum to 1 (max error {rowsum_err:.3e})")
    if not _strongly_connected(P > 0.0):
        raise ConvergenceError("chain is reducible: transition support is not strongly connected")

    # iterate the lazy chain (P + I)/2: same stationary vector, and the
    # damping removes the period-2 oscillation of bipartite supports
    pi = np.full(n, 1.0 / n)
    for _ in range(STATIONARY_MAX_ITER):
        nxt = 0.5 * (pi @ P + pi)
        nxt /= nxt.sum()
        if np.abs(nxt @ P - nxt).sum() <= tol:
            return nxt
        pi = nxt
    raise ConvergenceError(f"no stationary fixed point to {tol:.0e} after {STATIONARY_MAX_ITER} iterations")


def _strongly_connected(adj: np.ndarray) -> bool:
    n = adj.shape[0]
    for mat in (adj, adj.T):
        seen = np.zeros(n, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            i = stack.pop()
            nbrs = np.flatnonzero(mat[i] & ~seen)
            seen[nbrs] = True
            stack.extend(nbrs.tolist())
        if not seen.all():
            return False
    return True
