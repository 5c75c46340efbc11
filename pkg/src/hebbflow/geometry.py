"""Manifold substrates: area-uniform sampling, nearest-point retraction,
and chord distances.

Curved manifolds carry both a parametric chart (for sampling with the
correct area weighting) and enough structure for a nearest-point
projection: closed form where available (circle, sphere, torus), otherwise
a coarse chart-grid search refined by a few Newton steps. The
SyntheticSpectrum "manifold" is a rotated Gaussian measure standing in for
high-dimensional feature clouds; it is flat and unconstrained.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import backend
from .errors import CapabilityError, DimensionError
from .numerics import SeededRng, gauss_matrix

_NEWTON_STEPS = 5


@dataclass
class Swarm:
    positions: np.ndarray  # (N, n) ambient coordinates
    manifold: "Manifold"

    @property
    def size(self) -> int:
        return self.positions.shape[0]


class Manifold:
    """Base interface; subclasses fill in kind-specific geometry."""

    kind: str = ""
    intrinsic_dim: int = 0
    ambient_dim: int = 0
    free: bool = False  # True when points are unconstrained (no retraction)

    def sample(self, count: int, rng: SeededRng) -> np.ndarray:
        raise NotImplementedError

    def sample_patch(self, count: int, rng: SeededRng, center: float = 0.5, radius: float = 1.0) -> np.ndarray:
        raise CapabilityError(f"{self.kind} has no localized patch sampler")

    def project(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def constraint_residual(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def params(self) -> dict:
        return {}


def sample_uniform(manifold: Manifold, count: int, rng: SeededRng) -> Swarm:
    """Swarm of ``count`` i.i.d. draws from the area-uniform measure."""
    if count < 1:
        raise DimensionError("need at least one agent")
    return Swarm(manifold.sample(count, rng), manifold)


def project(manifold: Manifold, points: np.ndarray) -> np.ndarray:
    """Nearest-point retraction of one point or a batch of rows."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    out = manifold.project(pts)
    return out[0] if np.asarray(points).ndim == 1 else out


def pairwise_chord_distances(swarm: Swarm) -> np.ndarray:
    """Symmetric matrix of ambient (chord) distances between agents."""
    if swarm.size < 2:
        raise DimensionError("need at least two agents for pairwise distances")
    return backend.pairwise_dist(np.ascontiguousarray(swarm.positions))


# --- closed-form kinds -------------------------------------------------


@dataclass
class Circle(Manifold):
    radius: float = 1.0
    kind: str = "circle"
    intrinsic_dim: int = 1
    ambient_dim: int = 2

    def sample(self, count, rng):
        theta = 2.0 * np.pi * rng.uniform(count)
        return self.radius * np.column_stack([np.cos(theta), np.sin(theta)])

    def sample_patch(self, count, rng, center=0.5, radius=1.0):
        theta0 = 2.0 * np.pi * center
        half = radius / self.radius
        theta = theta0 + (2.0 * rng.uniform(count) - 1.0) * half
        return self.radius * np.column_stack([np.cos(theta), np.sin(theta)])

    def project(self, points):
        norms = np.linalg.norm(points, axis=1, keepdims=True)
        safe = np.where(norms > 0, norms, 1.0)
        out = self.radius * points / safe
        out[norms[:, 0] == 0] = np.array([self.radius, 0.0])
        return out

    def constraint_residual(self, points):
        return np.abs(np.linalg.norm(points, axis=1) - self.radius)

    def params(self):
        return {"radius": self.radius}

    def angles(self, points: np.ndarray) -> np.ndarray:
        return np.arctan2(points[:, 1], points[:, 0])


@dataclass
class Sphere(Manifold):
    radius: float = 1.0
    kind: str = "sphere"
    intrinsic_dim: int = 2
    ambient_dim: int = 3

    def sample(self, count, rng):
        z = gauss_matrix(rng, count, 3)
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        return self.radius * z

    def sample_patch(self, count, rng, center=0.5, radius=1.0):
        # spherical cap of geodesic radius ``radius`` about a fixed axis
        alpha = min(radius / self.radius, np.pi)
        cos_lo = np.cos(alpha)
        z = cos_lo + (1.0 - cos_lo) * rng.uniform(count)
        phi = 2.0 * np.pi * rng.uniform(count)
        s = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        return self.radius * np.column_stack([s * np.cos(phi), s * np.sin(phi), z])

    def project(self, points):
        norms = np.linalg.norm(points, axis=1, keepdims=True)
        safe = np.where(norms > 0, norms, 1.0)
        out = self.radius * points / safe
        out[norms[:, 0] == 0] = np.array([0.0, 0.0, self.radius])
        return out

    def constraint_residual(self, points):
        return np.abs(np.linalg.norm(points, axis=1) - self.radius)

    def params(self):
        return {"radius": self.radius}


@dataclass
class Torus(Manifold):
    major_radius: float = 2.0
    minor_radius: float = 0.5
    kind: str = "torus"
    intrinsic_dim: int = 2
    ambient_dim: int = 3

    def sample(self, count, rng):
        R, r = self.major_radius, self.minor_radius
        u = 2.0 * np.pi * rng.uniform(count)
        # tube angle v needs weight (R + r cos v) / (R + r): rejection
        v = np.empty(count)
        filled = 0
        while filled < count:
            cand = 2.0 * np.pi * rng.uniform(count)
            acc = rng.uniform(count) * (R + r) <= R + r * np.cos(cand)
            take = cand[acc][: count - filled]
            v[filled : filled + take.size] = take
            filled += take.size
        ring = R + r * np.cos(v)
        return np.column_stack([ring * np.cos(u), ring * np.sin(u), r * np.sin(v)])

    def project(self, points):
        R, r = self.major_radius, self.minor_radius
        x, y, z = points[:, 0], points[:, 1], points[:, 2]
        rho = np.hypot(x, y)
        safe = np.where(rho > 0, rho, 1.0)
        cx = R * x / safe
        cy = R * y / safe
        cx = np.where(rho > 0, cx, R)
        cy = np.where(rho > 0, cy, 0.0)
        dx, dy, dz = x - cx, y - cy, z
        d = np.sqrt(dx * dx + dy * dy + dz * dz)
        dsafe = np.where(d > 0, d, 1.0)
        out = np.column_stack([cx + r * dx / dsafe, cy + r * dy / dsafe, r * dz / dsafe])
        on_axis = d == 0
        if on_axis.any():
            out[on_axis] = np.column_stack([cx[on_axis] * (1 + r / R), cy[on_axis] * (1 + r / R), np.zeros(on_axis.sum())])
        return out

    def constraint_residual(self, points):
        rho = np.hypot(points[:, 0], points[:, 1])
        return np.abs(np.hypot(rho - self.major_radius, points[:, 2]) - self.minor_radius)

    def params(self):
        return {"major_radius": self.major_radius, "minor_radius": self.minor_radius}


# --- chart kinds with grid + Newton retraction --------------------------


def _newton_curve(t, p2d, curve, dcurve, d2curve, lo, hi):
    """Refine nearest-parameter estimates on a planar curve, then clamp."""
    for _ in range(_NEWTON_STEPS):
        c = curve(t)
        dc = dcurve(t)
        d2c = d2curve(t)
        diff = c - p2d
        g = (diff * dc).sum(axis=1)
        h = (dc * dc).sum(axis=1) + (diff * d2c).sum(axis=1)
        h = np.where(np.abs(h) < 1e-12, 1e-12, h)
        t = np.clip(t - g / h, lo, hi)
    return t


@dataclass
class SwissRoll(Manifold):
    """Spiral sheet (t cos t, y, t sin t); the chart has a boundary, so the
    retraction clamps parameters to the chart domain."""

    t_min: float = 1.5 * np.pi
    t_max: float = 4.5 * np.pi
    height: float = 26.0
    grid_size: int = 128
    kind: str = "swiss_roll"
    intrinsic_dim: int = 2
    ambient_dim: int = 3

    def _embed(self, t, y):
        return np.column_stack([t * np.cos(t), y, t * np.sin(t)])

    def _sample_t(self, count, rng):
        # arc-length density on the chart is sqrt(1 + t^2): rejection
        bound = np.sqrt(1.0 + self.t_max**2)
        t = np.empty(count)
        filled = 0
        while filled < count:
            cand = self.t_min + (self.t_max - self.t_min) * rng.uniform(count)
            acc = rng.uniform(count) * bound <= np.sqrt(1.0 + cand * cand)
            take = cand[acc][: count - filled]
            t[filled : filled + take.size] = take
            filled += take.size
        return t

    def sample(self, count, rng):
        t = self._sample_t(count, rng)
        y = (rng.uniform(count) - 0.5) * self.height
        return self._embed(t, y)

    def sample_patch(self, count, rng, center=0.5, radius=1.0):
        t0 = self.t_min + center * (self.t_max - self.t_min)
        # radius is measured in arc length; convert via local speed
        half_t = radius / np.sqrt(1.0 + t0 * t0)
        t = np.clip(t0 + (2.0 * rng.uniform(count) - 1.0) * half_t, self.t_min, self.t_max)
        y = center * self.height - self.height / 2 + (2.0 * rng.uniform(count) - 1.0) * radius
        y = np.clip(y, -self.height / 2, self.height / 2)
        return self._embed(t, y)

    def project(self, points):
        p2d = np.ascontiguousarray(points[:, [0, 2]])
        t = backend.spiral_project(p2d, self.t_min, self.t_max, self.grid_size, _NEWTON_STEPS)
        y = np.clip(points[:, 1], -self.height / 2, self.height / 2)
        return self._embed(t, y)

    def constraint_residual(self, points):
        return np.linalg.norm(points - self.project(points), axis=1)

    def params(self):
        return {"t_min": self.t_min, "t_max": self.t_max, "height": self.height}

    def chart_t(self, points: np.ndarray) -> np.ndarray:
        """Spiral parameter of on-manifold points (radius in the xz-plane)."""
        return np.hypot(points[:, 0], points[:, 2])

    def arc_length_from(self, t: np.ndarray) -> np.ndarray:
        # antiderivative of sqrt(1 + t^2)
        F = lambda u: 0.5 * (u * np.sqrt(1 + u * u) + np.arcsinh(u))
        return F(t) - F(self.t_min)


@dataclass
class SCurve(Manifold):
    """S-shaped sheet (sin t, y, sign(t)(cos t - 1)); unit-speed chart.

    ``density_tilt`` skews the chart density toward one end (0 = uniform);
    the heterogeneous variant used in experiments is tilt > 0.
    """

    t_half: float = 1.5 * np.pi
    height: float = 2.0
    density_tilt: float = 0.0
    grid_size: int = 128
    kind: str = "s_curve"
    intrinsic_dim: int = 2
    ambient_dim: int = 3

    _grid: np.ndarray = field(init=False, repr=False)
    _grid_pts: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self._grid = np.linspace(-self.t_half, self.t_half, self.grid_size)
        self._grid_pts = self._curve(self._grid)

    @staticmethod
    def _curve(t):
        return np.column_stack([np.sin(t), np.sign(t) * (np.cos(t) - 1.0)])

    def _embed(self, t, y):
        c = self._curve(t)
        return np.column_stack([c[:, 0], y, c[:, 1]])

    def sample(self, count, rng):
        if self.density_tilt == 0.0:
            t = -self.t_half + 2.0 * self.t_half * rng.uniform(count)
        else:
            # density proportional to exp(tilt * t / t_half), inverse-CDF
            a = self.density_tilt
            u = rng.uniform(count)
            t = self.t_half / a * np.log(np.exp(-a) + u * (np.exp(a) - np.exp(-a)))
        y = (rng.uniform(count) - 0.5) * self.height
        return self._embed(t, y)

    def sample_patch(self, count, rng, center=0.5, radius=1.0):
        t0 = -self.t_half + 2.0 * center * self.t_half
        t = np.clip(t0 + (2.0 * rng.uniform(count) - 1.0) * radius, -self.t_half, self.t_half)
        y = np.clip((2.0 * rng.uniform(count) - 1.0) * radius, -self.height / 2, self.height / 2)
        return self._embed(t, y)

    def project(self, points):
        p2d = points[:, [0, 2]]
        d2 = ((p2d[:, None, :] - self._grid_pts[None, :, :]) ** 2).sum(axis=2)
        t = self._grid[np.argmin(d2, axis=1)]
        dcurve = lambda t: np.column_stack([np.cos(t), -np.sign(t) * np.sin(t)])
        d2curve = lambda t: np.column_stack([-np.sin(t), -np.sign(t) * np.cos(t)])
        t = _newton_curve(t, p2d, self._curve, dcurve, d2curve, -self.t_half, self.t_half)
        y = np.clip(points[:, 1], -self.height / 2, self.height / 2)
        return self._embed(t, y)

    def constraint_residual(self, points):
        return np.linalg.norm(points - self.project(points), axis=1)

    def params(self):
        return {"t_half": self.t_half, "height": self.height, "density_tilt": self.density_tilt}


@dataclass
class MoebiusStrip(Manifold):
    major_radius: float = 2.0
    half_width: float = 0.6
    grid_u: int = 256
    grid_s: int = 9
    kind: str = "moebius"
    intrinsic_dim: int = 2
    ambient_dim: int = 3

    def _embed(self, u, s):
        ring = self.major_radius + s * np.cos(u / 2)
        return np.column_stack([ring * np.cos(u), ring * np.sin(u), s * np.sin(u / 2)])

    def _jacobian(self, u, s):
        c2, s2 = np.cos(u / 2), np.sin(u / 2)
        cu, su = np.cos(u), np.sin(u)
        ring = self.major_radius + s * c2
        du = np.column_stack([-0.5 * s * s2 * cu - ring * su, -0.5 * s * s2 * su + ring * cu, 0.5 * s * c2])
        ds = np.column_stack([c2 * cu, c2 * su, s2])
        return du, ds

    def sample(self, count, rng):
        # rejection against the numeric area element |p_u x p_s|
        w = self.half_width
        bound = (self.major_radius + w) * 1.2
        u = np.empty(count)
        s = np.empty(count)
        filled = 0
        while filled < count:
            cu = 2.0 * np.pi * rng.uniform(count)
            cs = (2.0 * rng.uniform(count) - 1.0) * w
            du, ds = self._jacobian(cu, cs)
            area = np.linalg.norm(np.cross(du, ds), axis=1)
            acc = rng.uniform(count) * bound <= area
            ku, ks = cu[acc], cs[acc]
            take = min(ku.size, count - filled)
            u[filled : filled + take] = ku[:take]
            s[filled : filled + take] = ks[:take]
            filled += take
        return self._embed(u, s)

    def project(self, points):
        ug = np.linspace(0.0, 2.0 * np.pi, self.grid_u, endpoint=False)
        sg = np.linspace(-self.half_width, self.half_width, self.grid_s)
        uu, ss = np.meshgrid(ug, sg, indexing="ij")
        grid_pts = self._embed(uu.ravel(), ss.ravel())
        d2 = ((points[:, None, :] - grid_pts[None, :, :]) ** 2).sum(axis=2)
        best = np.argmin(d2, axis=1)
        u = uu.ravel()[best]
        s = ss.ravel()[best]
        for _ in range(2 * _NEWTON_STEPS):
            # Gauss-Newton on the chart; s clamps to the strip boundary
            p = self._embed(u, s)
            du, ds = self._jacobian(u, s)
            diff = p - points
            g1 = (diff * du).sum(axis=1)
            g2 = (diff * ds).sum(axis=1)
            a = (du * du).sum(axis=1)
            b = (du * ds).sum(axis=1)
            c = (ds * ds).sum(axis=1)
            det = a * c - b * b
            det = np.where(np.abs(det) < 1e-12, 1e-12, det)
            u = u - (c * g1 - b * g2) / det
            s = np.clip(s - (a * g2 - b * g1) / det, -self.half_width, self.half_width)
        return self._embed(u, s)

    def constraint_residual(self, points):
        return np.linalg.norm(points - self.project(points), axis=1)

    def params(self):
        return {"major_radius": self.major_radius, "half_width": self.half_width}


# --- flat Gaussian proxy -------------------------------------------------


@dataclass
class SyntheticSpectrum(Manifold):
    """Rotated Gaussian measure with a prescribed eigenvalue spectrum.

    Stands in for high-dimensional feature clouds; the rotation basis is a
    deterministic function of ``rotation_seed`` so the true principal
    directions are known exactly.
    """

    eigenvalues: np.ndarray = field(default_factory=lambda: np.array([3.0, 2.0, 1.0]))
    rotation_seed: int = 0
    kind: str = "synthetic_spectrum"
    free: bool = True

    _basis: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=np.float64)
        if lam.ndim != 1 or lam.size < 1:
            raise DimensionError("eigenvalues must be a non-empty vector")
        if np.any(np.diff(lam) > 1e-12) or np.any(lam < 0):
            raise DimensionError("eigenvalues must be non-negative and non-increasing")
        self.eigenvalues = lam
        self.intrinsic_dim = int(lam.size)
        self.ambient_dim = int(lam.size)
        rng = SeededRng(self.rotation_seed)
        G = gauss_matrix(rng, lam.size, lam.size)
        self._basis, _ = np.linalg.qr(G)

    @property
    def basis(self) -> np.ndarray:
        """Orthogonal matrix whose columns are the true principal axes."""
        return self._basis

    def covariance(self) -> np.ndarray:
        return self._basis @ np.diag(self.eigenvalues) @ self._basis.T

    def sample(self, count, rng):
        z = gauss_matrix(rng, count, self.ambient_dim)
        return (z * np.sqrt(self.eigenvalues)) @ self._basis.T

    def project(self, points):
        return np.array(points, dtype=np.float64, copy=True)

    def constraint_residual(self, points):
        return np.zeros(points.shape[0])

    def params(self):
        return {"eigenvalues": self.eigenvalues.tolist(), "rotation_seed": self.rotation_seed}

    @staticmethod
    def power_law(n: int, exponent: float = 1.0, scale: float = 1.0, rotation_seed: int = 0) -> "SyntheticSpectrum":
        lam = scale / np.arange(1, n + 1, dtype=np.float64) ** exponent
        return SyntheticSpectrum(lam, rotation_seed)

    @staticmethod
    def plateau(n: int, m: int, top: float = 30.0, tail: float = 1.0, decay: float = 0.8, rotation_seed: int = 0) -> "SyntheticSpectrum":
        """Linearly spaced top-m block over a geometrically decaying tail."""
        head = np.linspace(top, top / 2, m)
        rest = tail * decay ** np.arange(n - m, dtype=np.float64)
        return SyntheticSpectrum(np.concatenate([head, rest]), rotation_seed)


_KINDS = {
    "circle": Circle,
    "sphere": Sphere,
    "torus": Torus,
    "swiss_roll": SwissRoll,
    "s_curve": SCurve,
    "moebius": MoebiusStrip,
    "synthetic_spectrum": SyntheticSpectrum,
}


def make_manifold(kind: str, **params) -> Manifold:
    try:
        cls = _KINDS[kind]
    except KeyError:
        raise CapabilityError(f"unknown manifold kind {kind!r}; choose from {sorted(_KINDS)}") from None
    return cls(**params)
