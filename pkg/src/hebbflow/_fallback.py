"""Pure-numpy twin of the compiled kernels in ``_kernels.pyx``.

Selected automatically when the extension is absent (or forced via the
HEBBFLOW_FORCE_FALLBACK environment variable). Streams from the RNG
functions match the compiled ones bit-for-bit at the integer level; the
Box-Muller floats agree to the last unit in place of the platform libm.
"""

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_INV_2POW53 = 1.0 / 9007199254740992.0


def _raw(key, counter, count):
    with np.errstate(over="ignore"):
        idx = np.arange(1, count + 1, dtype=np.uint64) + np.uint64(counter)
        z = np.uint64(key) + idx * GOLDEN
        z ^= z >> np.uint64(30)
        z *= _MIX1
        z ^= z >> np.uint64(27)
        z *= _MIX2
        z ^= z >> np.uint64(31)
    return z


def fill_uniform(key, counter, count):
    z = _raw(key, counter, count)
    return (z >> np.uint64(11)).astype(np.float64) * _INV_2POW53, count


def fill_normal(key, counter, count):
    pairs = (count + 1) // 2
    z = _raw(key, counter, 2 * pairs)
    u1 = ((z[0::2] >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * _INV_2POW53
    u2 = (z[1::2] >> np.uint64(11)).astype(np.float64) * _INV_2POW53
    r = np.sqrt(-2.0 * np.log(u1))
    a = 2.0 * np.pi * u2
    out = np.empty(2 * pairs)
    out[0::2] = r * np.cos(a)
    out[1::2] = r * np.sin(a)
    return out[:count], 2 * pairs


def jacobi_eig(A_in, tol=1e-14, max_sweeps=60):
    A = np.array(A_in, dtype=np.float64, copy=True)
    n = A.shape[0]
    V = np.eye(n)
    norm = np.linalg.norm(A)
    if norm == 0.0:
        return np.zeros(n), V

    for sweep in range(max_sweeps):
        off = np.sqrt(2.0 * (np.triu(A, 1) ** 2).sum())
        if off <= tol * norm:
            break
        thresh = off / (n * n) if sweep < 3 else 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= thresh or abs(apq) < 1e-300:
                    continue
                theta = 0.5 * (A[q, q] - A[p, p]) / apq
                if theta >= 0:
                    t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p = c * A[:, p] - s * A[:, q]
                col_q = s * A[:, p] + c * A[:, q]
                A[:, p] = col_p
                A[:, q] = col_q
                row_p = c * A[p, :] - s * A[q, :]
                row_q = s * A[p, :] + c * A[q, :]
                A[p, :] = row_p
                A[q, :] = row_q
                v_p = c * V[:, p] - s * V[:, q]
                v_q = s * V[:, p] + c * V[:, q]
                V[:, p] = v_p
                V[:, q] = v_q

    w = np.diagonal(A).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], np.ascontiguousarray(V[:, order])


def hebb_trace(W, X):
    N = X.shape[0]
    Y = X @ W.T
    A = Y.T @ X
    inhib = float((Y * Y).sum()) / N
    return A / N - inhib * W


def hebb_ordered(W, X):
    m = W.shape[0]
    N = X.shape[0]
    Y = X @ W.T
    A = Y.T @ X
    S = np.tril(Y.T @ Y)
    return (A - m * (S @ W)) / N


def spiral_project(p2d, t_lo, t_hi, n_grid, n_newton):
    gt = np.linspace(t_lo, t_hi, n_grid)
    grid = np.column_stack([gt * np.cos(gt), gt * np.sin(gt)])
    d2 = ((p2d[:, None, :] - grid[None, :, :]) ** 2).sum(axis=2)
    t = gt[np.argmin(d2, axis=1)]
    for _ in range(n_newton):
        ct, st = np.cos(t), np.sin(t)
        cx, cy = t * ct, t * st
        dcx, dcy = ct - t * st, st + t * ct
        d2cx, d2cy = -2.0 * st - t * ct, 2.0 * ct - t * st
        g = (cx - p2d[:, 0]) * dcx + (cy - p2d[:, 1]) * dcy
        h = dcx * dcx + dcy * dcy + (cx - p2d[:, 0]) * d2cx + (cy - p2d[:, 1]) * d2cy
        h = np.where(np.abs(h) < 1e-12, 1e-12, h)
        t = np.clip(t - g / h, t_lo, t_hi)
    return t


def pairwise_dist(X):
    sq = (X * X).sum(axis=1)
    D2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.maximum(D2, 0.0, out=D2)
    D = np.sqrt(D2)
    np.fill_diagonal(D, 0.0)
    return D
