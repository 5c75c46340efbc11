# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: counter-based RNG, cyclic Jacobi eigensolver,
Hebbian accumulators, pairwise distances.

The pure-Python twin of this module lives in ``_fallback.py``; both expose
the same functions and are selected at import time by ``backend.py``.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, fabs, log, sin, sqrt

cnp.import_array()

cdef extern from "math.h":
    double M_PI

# splitmix64 stream constants; copying these (and the output transforms
# below) is enough to reproduce the streams in another language.
cdef unsigned long long GOLDEN = 0x9E3779B97F4A7C15ULL
cdef unsigned long long MIX1 = 0xBF58476D1CE4E5B9ULL
cdef unsigned long long MIX2 = 0x94D049BB133111EBULL

cdef double INV_2POW53 = 1.0 / 9007199254740992.0


cdef inline unsigned long long _mix(unsigned long long z) nogil:
    z ^= z >> 30
    z *= MIX1
    z ^= z >> 27
    z *= MIX2
    z ^= z >> 31
    return z


cdef inline unsigned long long _raw(unsigned long long key, unsigned long long k) nogil:
    return _mix(key + (k + 1) * GOLDEN)


def fill_uniform(unsigned long long key, unsigned long long counter, Py_ssize_t count):
    """count i.i.d. uniforms in [0, 1) from stream position ``counter``.

    Returns (values, words_consumed).
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(count, dtype=np.float64)
    cdef Py_ssize_t i
    for i in range(count):
        out[i] = <double>(_raw(key, counter + i) >> 11) * INV_2POW53
    return out, count


def fill_normal(unsigned long long key, unsigned long long counter, Py_ssize_t count):
    """count i.i.d. standard normals via the Box-Muller transform.

    Each pair consumes two stream words; an odd count still consumes the
    full final pair so the stream position stays a pure function of the
    request sizes. Returns (values, words_consumed).
    """
    cdef Py_ssize_t pairs = (count + 1) // 2
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(count, dtype=np.float64)
    cdef Py_ssize_t i
    cdef double u1, u2, r, a
    for i in range(pairs):
        u1 = <double>((_raw(key, counter + 2 * i) >> 11) + 1) * INV_2POW53
        u2 = <double>(_raw(key, counter + 2 * i + 1) >> 11) * INV_2POW53
        r = sqrt(-2.0 * log(u1))
        a = 2.0 * M_PI * u2
        out[2 * i] = r * cos(a)
        if 2 * i + 1 < count:
            out[2 * i + 1] = r * sin(a)
    return out, 2 * pairs


def jacobi_eig(cnp.ndarray[cnp.float64_t, ndim=2] A_in, double tol=1e-14, int max_sweeps=60):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues descending, eigenvector columns). Convergence is
    declared when the off-diagonal Frobenius norm drops below tol times the
    full Frobenius norm.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] A = np.array(A_in, dtype=np.float64, copy=True, order="C")
    cdef Py_ssize_t n = A.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] V = np.eye(n)
    cdef Py_ssize_t p, q, k, sweep
    cdef double off, norm, apq, app, aqq, theta, t, c, s, akp, akq, vkp, vkq
    cdef double thresh

    norm = np.linalg.norm(A)
    if norm == 0.0:
        return np.zeros(n), V

    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += 2.0 * A[p, q] * A[p, q]
        off = sqrt(off)
        if off <= tol * norm:
            break
        thresh = off / (n * n) if sweep < 3 else 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if fabs(apq) <= thresh:
                    continue
                app = A[p, p]
                aqq = A[q, q]
                if fabs(apq) < 1e-300:
                    continue
                theta = 0.5 * (aqq - app) / apq
                if theta >= 0:
                    t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = c * akp - s * akq
                    A[k, q] = s * akp + c * akq
                for k in range(n):
                    akp = A[p, k]
                    akq = A[q, k]
                    A[p, k] = c * akp - s * akq
                    A[q, k] = s * akp + c * akq
                for k in range(n):
                    vkp = V[k, p]
                    vkq = V[k, q]
                    V[k, p] = c * vkp - s * vkq
                    V[k, q] = s * vkp + c * vkq

    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.diagonal(A).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], np.ascontiguousarray(V[:, order])


def hebb_trace(cnp.ndarray[cnp.float64_t, ndim=2] W, cnp.ndarray[cnp.float64_t, ndim=2] X):
    """Swarm-averaged Hebbian increment with scalar (trace) inhibition.

    delta = (1/N) sum_i [ (W x_i) x_i^T - ||W x_i||^2 W ], accumulated in
    agent index order.
    """
    cdef Py_ssize_t m = W.shape[0]
    cdef Py_ssize_t n = W.shape[1]
    cdef Py_ssize_t N = X.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] A = np.zeros((m, n))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.empty(m)
    cdef double inhib = 0.0
    cdef Py_ssize_t i, a, b
    cdef double acc
    for i in range(N):
        for a in range(m):
            acc = 0.0
            for b in range(n):
                acc += W[a, b] * X[i, b]
            y[a] = acc
        for a in range(m):
            inhib += y[a] * y[a]
            for b in range(n):
                A[a, b] += y[a] * X[i, b]
    cdef double invn = 1.0 / N
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((m, n))
    inhib *= invn
    for a in range(m):
        for b in range(n):
            out[a, b] = A[a, b] * invn - inhib * W[a, b]
    return out


def hebb_ordered(cnp.ndarray[cnp.float64_t, ndim=2] W, cnp.ndarray[cnp.float64_t, ndim=2] X):
    """Hebbian increment with scaled lower-triangular (deflation) inhibition.

    delta = (1/N) Y^T X - m * tril(Y^T Y / N) W, with Y = X W^T. Reduces to
    the trace rule when m == 1.
    """
    cdef Py_ssize_t m = W.shape[0]
    cdef Py_ssize_t n = W.shape[1]
    cdef Py_ssize_t N = X.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] A = np.zeros((m, n))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] S = np.zeros((m, m))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.empty(m)
    cdef Py_ssize_t i, a, b
    cdef double acc
    for i in range(N):
        for a in range(m):
            acc = 0.0
            for b in range(n):
                acc += W[a, b] * X[i, b]
            y[a] = acc
        for a in range(m):
            for b in range(a + 1):
                S[a, b] += y[a] * y[b]
            for b in range(n):
                A[a, b] += y[a] * X[i, b]
    cdef double invn = 1.0 / N
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((m, n))
    cdef double acc2
    for a in range(m):
        for b in range(n):
            acc2 = 0.0
            for i in range(a + 1):
                acc2 += S[a, i] * W[i, b]
            out[a, b] = (A[a, b] - m * acc2) * invn
    return out


def spiral_project(cnp.ndarray[cnp.float64_t, ndim=2] p2d, double t_lo, double t_hi,
                   Py_ssize_t n_grid, Py_ssize_t n_newton):
    """Nearest parameter on the planar spiral (t cos t, t sin t) for each
    row of p2d: coarse grid search then Newton refinement, clamped to
    [t_lo, t_hi]."""
    cdef Py_ssize_t N = p2d.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(N)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] gt = np.empty(n_grid)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] gx = np.empty(n_grid)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] gy = np.empty(n_grid)
    cdef Py_ssize_t i, j, it, best
    cdef double step = (t_hi - t_lo) / (n_grid - 1)
    cdef double t, px, py, d2, best_d2, dx, dy
    cdef double ct, st, cx, cy, dcx, dcy, d2cx, d2cy, g, h
    for j in range(n_grid):
        t = t_lo + step * j
        gt[j] = t
        gx[j] = t * cos(t)
        gy[j] = t * sin(t)
    for i in range(N):
        px = p2d[i, 0]
        py = p2d[i, 1]
        best = 0
        best_d2 = 1e300
        for j in range(n_grid):
            dx = gx[j] - px
            dy = gy[j] - py
            d2 = dx * dx + dy * dy
            if d2 < best_d2:
                best_d2 = d2
                best = j
        t = gt[best]
        for it in range(n_newton):
            ct = cos(t)
            st = sin(t)
            cx = t * ct
            cy = t * st
            dcx = ct - t * st
            dcy = st + t * ct
            d2cx = -2.0 * st - t * ct
            d2cy = 2.0 * ct - t * st
            g = (cx - px) * dcx + (cy - py) * dcy
            h = dcx * dcx + dcy * dcy + (cx - px) * d2cx + (cy - py) * d2cy
            if fabs(h) < 1e-12:
                h = 1e-12
            t = t - g / h
            if t < t_lo:
                t = t_lo
            if t > t_hi:
                t = t_hi
        out[i] = t
    return out


def pairwise_dist(cnp.ndarray[cnp.float64_t, ndim=2] X):
    """Full symmetric matrix of Euclidean distances between rows of X."""
    cdef Py_ssize_t N = X.shape[0]
    cdef Py_ssize_t n = X.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] D = np.zeros((N, N))
    cdef Py_ssize_t i, j, k
    cdef double acc, d
    for i in range(N):
        for j in range(i + 1, N):
            acc = 0.0
            for k in range(n):
                d = X[i, k] - X[j, k]
                acc += d * d
            acc = sqrt(acc)
            D[i, j] = acc
            D[j, i] = acc
    return D
