"""Uniform cell-centered Cartesian grids and boundary-condition handling.

Scalar fields are plain ndarrays of shape `dims`; velocity fields have a
trailing component axis, shape `dims + (d,)`.  Face-centered data for axis
`a` is an ndarray with `dims[a] + 1` entries along that axis.  Ghost layers
are materialized on demand by the fill functions below (one layer, enough
for the second-order stencils used here).
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigurationError


class BCType(Enum):
    PERIODIC = "periodic"
    DIRICHLET = "dirichlet"
    NEUMANN_OUTFLOW = "outflow"
    FREE_SLIP = "free_slip"


@dataclass
class FaceBC:
    """Boundary condition on one face.

    For DIRICHLET, `value` is None (zero), a tuple of component values, or a
    callable (points, t) -> (n, d) velocity array evaluated at face points.
    """

    type: BCType
    value: object = None


FACE_NAMES = ("xlo", "xhi", "ylo", "yhi", "zlo", "zhi")


@dataclass
class Grid:
    dims: tuple
    lo: tuple
    hi: tuple
    bc: dict = field(default_factory=dict)

    def __post_init__(self):
        self.dims = tuple(int(n) for n in self.dims)
        self.lo = tuple(float(v) for v in self.lo)
        self.hi = tuple(float(v) for v in self.hi)
        if not 1 <= len(self.dims) <= 3:
            raise ConfigurationError("grids must be 1, 2, or 3 dimensional")
        if any(n < 8 for n in self.dims):
            raise ConfigurationError("need at least 8 cells per axis")
        for name in self.face_names():
            self.bc.setdefault(name, FaceBC(BCType.PERIODIC))
        for a in range(self.ndim):
            blo, bhi = self.face_bc(a, 0), self.face_bc(a, 1)
            if (blo.type is BCType.PERIODIC) != (bhi.type is BCType.PERIODIC):
                raise ConfigurationError(
                    f"periodic axis {a} must pair opposing faces"
                )

    @property
    def ndim(self):
        return len(self.dims)

    @property
    def h(self):
        return tuple(
            (self.hi[a] - self.lo[a]) / self.dims[a] for a in range(self.ndim)
        )

    @property
    def cell_volume(self):
        return float(np.prod(self.h))

    def face_names(self):
        return FACE_NAMES[: 2 * self.ndim]

    def face_bc(self, axis, hi_side):
        return self.bc[FACE_NAMES[2 * axis + (1 if hi_side else 0)]]

    def periodic(self, axis):
        return self.face_bc(axis, 0).type is BCType.PERIODIC

    def axis_centers(self, axis):
        h = self.h[axis]
        return self.lo[axis] + (np.arange(self.dims[axis]) + 0.5) * h

    def center_points(self):
        """(dims..., d) array of cell-center coordinates."""
        axes = [self.axis_centers(a) for a in range(self.ndim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def face_points(self, axis, hi_side):
        """Coordinates of the wall-face points of one boundary face."""
        axes = []
        for a in range(self.ndim):
            if a == axis:
                axes.append(np.array([self.hi[a] if hi_side else self.lo[a]]))
            else:
                axes.append(self.axis_centers(a))
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack(mesh, axis=-1)
        return pts.reshape(-1, self.ndim)


def _sl(ndim, axis, s):
    out = [slice(None)] * ndim
    out[axis] = s
    return tuple(out)


def _bc_velocity_value(grid, bc, axis, hi_side, comp, t):
    """Dirichlet value of velocity component `comp` on one face, flattened."""
    if bc.value is None:
        return 0.0
    if callable(bc.value):
        pts = grid.face_points(axis, hi_side)
        vals = np.asarray(bc.value(pts, t))
        return vals[:, comp].reshape(
            [n for a, n in enumerate(grid.dims) if a != axis] or [1]
        )
    return float(np.asarray(bc.value, dtype=float)[comp])


def _ghost_region(nd, axis, hi_side):
    """Index tuple of one ghost face, excluding the padded corners."""
    out = [slice(1, -1)] * nd
    out[axis] = -1 if hi_side else 0
    return tuple(out)


def _first_region(nd, axis, hi_side):
    out = [slice(1, -1)] * nd
    out[axis] = -2 if hi_side else 1
    return tuple(out)


def fill_ghost_velocity(grid, u_comp, comp, t):
    """Pad a velocity component with one ghost layer per axis.

    Dirichlet ghosts linearly extrapolate through the wall value; outflow
    copies the interior; free-slip reflects the normal component and copies
    tangential ones; periodic wraps.  Corner ghosts are untouched (the
    second-order stencils here never read them).
    """
    nd = grid.ndim
    out = np.pad(u_comp, 1, mode="edge")
    for axis in range(nd):
        for hi_side in (0, 1):
            bc = grid.face_bc(axis, hi_side)
            ghost = _ghost_region(nd, axis, hi_side)
            first = _first_region(nd, axis, hi_side)
            if bc.type is BCType.PERIODIC:
                src = _first_region(nd, axis, 1 - hi_side)
                out[ghost] = out[src]
            elif bc.type is BCType.DIRICHLET:
                g = _bc_velocity_value(grid, bc, axis, hi_side, comp, t)
                out[ghost] = 2.0 * g - out[first]
            elif bc.type is BCType.NEUMANN_OUTFLOW:
                out[ghost] = out[first]
            elif bc.type is BCType.FREE_SLIP:
                out[ghost] = -out[first] if comp == axis else out[first]
            else:
                raise ConfigurationError(f"unhandled BC {bc.type}")
    return out


def fill_ghost_scalar(grid, phi):
    """Pad a cell-centered scalar with homogeneous-Neumann/periodic ghosts."""
    nd = grid.ndim
    out = np.pad(phi, 1, mode="edge")
    for axis in range(nd):
        for hi_side in (0, 1):
            bc = grid.face_bc(axis, hi_side)
            ghost = _ghost_region(nd, axis, hi_side)
            if bc.type is BCType.PERIODIC:
                out[ghost] = out[_first_region(nd, axis, 1 - hi_side)]
            else:
                out[ghost] = out[_first_region(nd, axis, hi_side)]
    return out


def laplacian(padded, h):
    """Second-order Laplacian of a padded array; returns the interior."""
    nd = padded.ndim
    core = padded[tuple(slice(1, -1) for _ in range(nd))]
    out = np.zeros_like(core)
    for axis in range(nd):
        up = padded[_sl(nd, axis, slice(2, None))]
        dn = padded[_sl(nd, axis, slice(0, -2))]
        others = [
            _sl(nd, a, slice(1, -1)) for a in range(nd) if a != axis
        ]
        for o in others:
            up = up[o]
            dn = dn[o]
        out += (up - 2.0 * core + dn) / h[axis] ** 2
    return out


def gradient(padded, axis, h):
    """Centered first derivative along `axis` of a padded array (interior)."""
    nd = padded.ndim
    up = padded[_sl(nd, axis, slice(2, None))]
    dn = padded[_sl(nd, axis, slice(0, -2))]
    for a in range(nd):
        if a != axis:
            up = up[_sl(nd, a, slice(1, -1))]
            dn = dn[_sl(nd, a, slice(1, -1))]
    return (up - dn) / (2.0 * h[axis])
