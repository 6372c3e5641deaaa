"""Analytic interfaces, signed distances, masks, markers and rigid motions."""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigurationError


class Orientation(Enum):
    EXTERIOR_ACTIVE = "exterior"
    INTERIOR_ACTIVE = "interior"


@dataclass
class Circle:
    center: tuple
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ConfigurationError("circle radius must be positive")


@dataclass
class Sphere:
    center: tuple
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ConfigurationError("sphere radius must be positive")


@dataclass
class Plate:
    """Line segment with a stored side-plane normal (2D open interface)."""

    p0: tuple
    p1: tuple
    normal: tuple

    def __post_init__(self):
        if np.allclose(self.p0, self.p1):
            raise ConfigurationError("plate endpoints must be distinct")
        n = np.asarray(self.normal, dtype=float)
        self.normal = tuple(n / np.linalg.norm(n))


@dataclass
class Polygon:
    """Simple closed polygon given as a vertex loop (2D)."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] < 3 or v.shape[1] != 2:
            raise ConfigurationError("polygon needs at least 3 2D vertices")
        self.vertices = v


@dataclass
class Interface:
    shape: object
    orientation: Orientation = Orientation.EXTERIOR_ACTIVE


def _winding_inside(points, verts):
    """Even/odd winding-number inside test, vectorized over points."""
    x, y = points[..., 0], points[..., 1]
    inside = np.zeros(x.shape, dtype=bool)
    n = len(verts)
    for i in range(n):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % n]
        crosses = (y0 > y) != (y1 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xi = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
        inside ^= crosses & (x < np.where(crosses, xi, np.inf))
    return inside


def _segment_distance(points, a, b):
    ab = b - a
    t = ((points - a) @ ab) / (ab @ ab)
    t = np.clip(t, 0.0, 1.0)
    proj = a + t[..., None] * ab
    return np.linalg.norm(points - proj, axis=-1)


def signed_distance(interface, x):
    """Signed distance: positive on the active side, negative on the other.

    Accepts a single point or an (..., d) array of points.
    """
    pts = np.asarray(x, dtype=float)
    scalar = pts.ndim == 1
    if scalar:
        pts = pts[None, :]
    shape = interface.shape
    if isinstance(shape, (Circle, Sphere)):
        d = np.linalg.norm(pts - np.asarray(shape.center), axis=-1) - shape.radius
    elif isinstance(shape, Plate):
        d = (pts - np.asarray(shape.p0)) @ np.asarray(shape.normal)
    elif isinstance(shape, Polygon):
        verts = shape.vertices
        dist = np.full(pts.shape[:-1], np.inf)
        for i in range(len(verts)):
            a, b = verts[i], verts[(i + 1) % len(verts)]
            dist = np.minimum(dist, _segment_distance(pts, a, b))
        d = np.where(_winding_inside(pts, verts), -dist, dist)
    else:
        raise ConfigurationError(f"unknown shape {type(shape).__name__}")
    if interface.orientation is Orientation.INTERIOR_ACTIVE:
        d = -d
    return float(d[0]) if scalar else d


def heaviside_field(interface, grid):
    """Cell-centered 0/1 mask: 1 on the active side and on the interface."""
    centers = grid.center_points()
    d = signed_distance(interface, centers)
    return (d >= 0.0).astype(float)


@dataclass
class MarkerSet:
    """Lagrangian markers: positions, surface elements and side tags."""

    X: np.ndarray          # (n, d) positions
    ds: np.ndarray         # (n,) surface element (length in 2D, area in 3D)
    side: np.ndarray = None  # (n,) 0 for closed interfaces, +-1 for plates

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.ds = np.asarray(self.ds, dtype=float)
        if self.side is None:
            self.side = np.zeros(len(self.X), dtype=int)

    def __len__(self):
        return len(self.X)


def _sphere_band_markers(center, radius, target_ds):
    """Latitude-band equal-area placement; Fibonacci lattice fallback."""
    n_bands = max(3, round(np.pi * radius / target_ds))
    pts = []
    for j in range(n_bands):
        theta = np.pi * (j + 0.5) / n_bands
        circ = 2 * np.pi * radius * np.sin(theta)
        n_j = max(1, round(circ / target_ds))
        phi = 2 * np.pi * (np.arange(n_j) + 0.5 * (j % 2)) / n_j
        for p in phi:
            pts.append(
                (
                    radius * np.sin(theta) * np.cos(p),
                    radius * np.sin(theta) * np.sin(p),
                    radius * np.cos(theta),
                )
            )
    pts = np.asarray(pts) + np.asarray(center)
    ds = np.full(len(pts), 4 * np.pi * radius**2 / len(pts))
    if abs(ds[0] - target_ds**2) > 0.2 * target_ds**2:
        n = max(4, round(4 * np.pi * radius**2 / target_ds**2))
        k = np.arange(n) + 0.5
        golden = np.pi * (1 + np.sqrt(5))
        theta = np.arccos(1 - 2 * k / n)
        phi = golden * k
        pts = np.column_stack(
            (
                radius * np.sin(theta) * np.cos(phi),
                radius * np.sin(theta) * np.sin(phi),
                radius * np.cos(theta),
            )
        ) + np.asarray(center)
        ds = np.full(n, 4 * np.pi * radius**2 / n)
    return pts, ds


def generate_markers(interface, target_ds):
    """Distribute markers on the interface with spacing ~ target_ds.

    Plates are duplicated into two side-tagged families sharing positions.
    """
    if target_ds <= 0:
        raise ConfigurationError("target_ds must be positive")
    shape = interface.shape
    if isinstance(shape, Circle):
        n = round(2 * np.pi * shape.radius / target_ds)
        if n < 3:
            raise ConfigurationError("target_ds too large for this circle")
        ang = 2 * np.pi * np.arange(n) / n
        X = np.column_stack(
            (
                shape.center[0] + shape.radius * np.cos(ang),
                shape.center[1] + shape.radius * np.sin(ang),
            )
        )
        ds = np.full(n, 2 * np.pi * shape.radius / n)
        return MarkerSet(X, ds)
    if isinstance(shape, Sphere):
        X, ds = _sphere_band_markers(shape.center, shape.radius, target_ds)
        return MarkerSet(X, ds)
    if isinstance(shape, Plate):
        p0 = np.asarray(shape.p0, dtype=float)
        p1 = np.asarray(shape.p1, dtype=float)
        length = np.linalg.norm(p1 - p0)
        n = round(length / target_ds) + 1
        if n < 2:
            raise ConfigurationError("target_ds too large for this plate")
        t = np.linspace(0.0, 1.0, n)
        X1 = p0 + t[:, None] * (p1 - p0)
        ds1 = np.full(n, length / (n - 1))
        ds1[[0, -1]] *= 0.5  # trapezoid end weights
        X = np.vstack((X1, X1))
        ds = np.concatenate((ds1, ds1))
        side = np.concatenate((np.ones(n, int), -np.ones(n, int)))
        return MarkerSet(X, ds, side)
    if isinstance(shape, Polygon):
        verts = shape.vertices
        seg = np.linalg.norm(np.roll(verts, -1, axis=0) - verts, axis=1)
        arc = np.concatenate(([0.0], np.cumsum(seg)))
        perim = arc[-1]
        n = round(perim / target_ds)
        if n < 3:
            raise ConfigurationError("target_ds too large for this polygon")
        s = perim * np.arange(n) / n
        loop = np.vstack((verts, verts[:1]))
        X = np.column_stack(
            (np.interp(s, arc, loop[:, 0]), np.interp(s, arc, loop[:, 1]))
        )
        return MarkerSet(X, np.full(n, perim / n))
    raise ConfigurationError(f"unknown shape {type(shape).__name__}")


@dataclass
class Static:
    pass


@dataclass
class ImpulsiveTranslation:
    velocity: tuple


@dataclass
class Oscillation:
    u_m: float
    period: float
    axis: tuple = (1.0, 0.0)

    def __post_init__(self):
        if self.period <= 0:
            raise ConfigurationError("oscillation period must be positive")
        a = np.asarray(self.axis, dtype=float)
        self.axis = tuple(a / np.linalg.norm(a))


@dataclass
class ExactTaylorGreen:
    re: float


def prescribed_velocity(motion, X, t):
    """Body velocity at marker positions X (n, d) and time t."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if isinstance(motion, Static):
        return np.zeros_like(X)
    if isinstance(motion, ImpulsiveTranslation):
        return np.broadcast_to(np.asarray(motion.velocity, float), X.shape).copy()
    if isinstance(motion, Oscillation):
        u = motion.u_m * np.cos(2 * np.pi * t / motion.period)
        return u * np.broadcast_to(np.asarray(motion.axis), X.shape).copy()
    if isinstance(motion, ExactTaylorGreen):
        from .cases import taylor_green_exact

        u, v, _ = taylor_green_exact(X[:, 0], X[:, 1], t, motion.re)
        return np.column_stack((u, v))
    raise ConfigurationError(f"unknown motion {type(motion).__name__}")


def displacement(motion, t, ndim=2):
    """Closed-form displacement of the body frame at time t."""
    if isinstance(motion, (Static, ExactTaylorGreen)):
        return np.zeros(ndim)
    if isinstance(motion, ImpulsiveTranslation):
        return t * np.asarray(motion.velocity, dtype=float)
    if isinstance(motion, Oscillation):
        amp = motion.u_m * motion.period / (2 * np.pi)
        return amp * np.sin(2 * np.pi * t / motion.period) * np.asarray(motion.axis)
    raise ConfigurationError(f"unknown motion {type(motion).__name__}")
