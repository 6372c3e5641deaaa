"""Marker-cell coupling: weight tables, interpolation J and spreading S.

Stored weights are dimensionless: a marker's interpolation value is a plain
weighted sum of cell values, and spreading multiplies by ds/cell_volume so
that the discrete integrals of spread data match the marker-side sums.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from . import mls
from .errors import ConfigurationError, NearSingularGram
from .kernels import eval1d, half_support
from .mls import ShiftMode, Stencil, generating_weights

log = logging.getLogger(__name__)

MODES = ("standard", "mls", "mls_cvs", "mls_ncvs")


def marker_stencil(grid, X, kind, heaviside=None, marker_id=None):
    """Collect the cells whose centers lie strictly inside the kernel support.

    Periodic axes wrap indices and use the nearest-image coordinate; other
    axes clip the stencil at the domain boundary.
    """
    half = half_support(kind)
    axes_idx, axes_coord = [], []
    for a in range(grid.ndim):
        h = grid.h[a]
        n = grid.dims[a]
        lo = grid.lo[a]
        # candidate cell indices around the marker
        i0 = int(np.floor((X[a] - lo) / h - 0.5 - half)) - 1
        i1 = int(np.ceil((X[a] - lo) / h - 0.5 + half)) + 1
        idx = np.arange(i0, i1 + 1)
        centers = lo + (idx + 0.5) * h
        if grid.periodic(a):
            length = grid.hi[a] - lo
            centers = X[a] + (centers - X[a] + 0.5 * length) % length - 0.5 * length
            idx = idx % n
        else:
            keep = (idx >= 0) & (idx < n)
            idx, centers = idx[keep], centers[keep]
        r = (centers - X[a]) / h
        keep = np.abs(r) < half - 1e-12
        axes_idx.append(idx[keep])
        axes_coord.append(centers[keep])
    mesh_idx = np.meshgrid(*axes_idx, indexing="ij")
    mesh_coord = np.meshgrid(*axes_coord, indexing="ij")
    indices = np.column_stack([m.ravel() for m in mesh_idx])
    points = np.column_stack([m.ravel() for m in mesh_coord])
    w = np.ones(len(points))
    for a in range(grid.ndim):
        w *= eval1d(kind, (points[:, a] - X[a]) / grid.h[a])
    if heaviside is None:
        H = np.ones(len(points))
    else:
        H = heaviside[tuple(indices.T)].astype(float)
    return Stencil(
        points=points,
        indices=indices,
        X=np.asarray(X, dtype=float),
        W=w,
        H=H,
        h=grid.h[0],
        marker_id=marker_id,
    )


def _mode_weights(stencil, modes, gram_fallback):
    """Weight vectors for each requested mode on one stencil."""
    out = {}
    if "standard" in modes:
        total = stencil.W.sum()
        if total <= 0.0:
            raise ConfigurationError(
                f"marker {stencil.marker_id} has an empty kernel support"
            )
        out["standard"] = stencil.W / total
    mls_modes = [m for m in modes if m.startswith("mls")]
    if mls_modes:
        try:
            gw = generating_weights(stencil)
        except NearSingularGram:
            if gram_fallback == "error":
                raise
            if gram_fallback != "two_sided":
                raise ConfigurationError(
                    f"unknown gram_fallback {gram_fallback!r}"
                ) from None
            log.warning(
                "marker %s: near-singular Gram matrix, falling back to the "
                "two-sided base kernel",
                stencil.marker_id,
            )
            w = stencil.W / stencil.W.sum()
            for m in mls_modes:
                out[m] = w
            out["_diag"] = None
            return out
        for m in mls_modes:
            if m == "mls":
                out[m] = gw.psi
            elif m == "mls_cvs":
                out[m] = mls.shift_cvs(
                    mls.GeneratingWeights(
                        psi=gw.psi, lam=gw.lam, L=gw.L, w_mls=gw.w_mls, H=gw.H
                    )
                ).psi_m
            elif m == "mls_ncvs":
                out[m] = mls.shift_ncvs(
                    mls.GeneratingWeights(
                        psi=gw.psi, lam=gw.lam, L=gw.L, w_mls=gw.w_mls, H=gw.H
                    )
                ).psi_m
            else:
                raise ConfigurationError(f"unknown coupling mode {m!r}")
        out["_diag"] = gw
    return out


@dataclass
class CouplingTable:
    """Flattened per-marker weight table for fast gather/scatter."""

    n_markers: int
    dims: tuple
    cell_volume: float
    ds: np.ndarray
    marker_volume: np.ndarray  # ds * h^(d-1): forcing-shell volume per marker
    cells: np.ndarray      # (K,) linear cell indices
    marker: np.ndarray     # (K,) marker id per entry
    w_interp: np.ndarray   # (K,)
    w_spread: np.ndarray   # (K,)
    offsets: np.ndarray    # (n_markers+1,) slice bounds into the flat arrays
    diagnostics: list = field(default_factory=list, repr=False)

    def marker_slice(self, m):
        return slice(self.offsets[m], self.offsets[m + 1])


def build_coupling_table(
    markers,
    grid,
    kind,
    heaviside=None,
    interp_mode="standard",
    spread_mode=None,
    gram_fallback="error",
    keep_diagnostics=False,
):
    """Assemble interpolation and spreading weights for a marker set.

    `heaviside` is the cell-centered active-side mask; it is ignored by the
    standard (two-sided) mode.  When interp and spread modes coincide the
    two weight sets share storage, making S exactly the adjoint of J.
    """
    spread_mode = spread_mode or interp_mode
    for m in (interp_mode, spread_mode):
        if m not in MODES:
            raise ConfigurationError(f"unknown coupling mode {m!r}")
    modes = {interp_mode, spread_mode}
    cells, marker_ids, wi, ws = [], [], [], []
    offsets = [0]
    diagnostics = []
    for mid in range(len(markers)):
        stencil = marker_stencil(
            grid, markers.X[mid], kind, heaviside=heaviside, marker_id=mid
        )
        weights = _mode_weights(stencil, modes, gram_fallback)
        lin = np.ravel_multi_index(tuple(stencil.indices.T), grid.dims)
        cells.append(lin)
        marker_ids.append(np.full(len(lin), mid))
        wi.append(weights[interp_mode])
        ws.append(weights[spread_mode])
        offsets.append(offsets[-1] + len(lin))
        if keep_diagnostics:
            diagnostics.append((stencil, weights.get("_diag")))
    table = CouplingTable(
        n_markers=len(markers),
        dims=grid.dims,
        cell_volume=grid.cell_volume,
        ds=markers.ds,
        marker_volume=markers.ds * grid.h[0] ** (grid.ndim - 1),
        cells=np.concatenate(cells),
        marker=np.concatenate(marker_ids),
        w_interp=np.concatenate(wi),
        w_spread=np.concatenate(ws),
        offsets=np.asarray(offsets),
        diagnostics=diagnostics,
    )
    return table


def interpolate(table, u):
    """Interpolate a cell field to the markers.

    u has shape dims (scalar) or dims + (d,); returns (n,) or (n, d).
    """
    if u.shape == tuple(table.dims):
        vals = u.reshape(-1)[table.cells]
        return np.bincount(
            table.marker, weights=vals * table.w_interp, minlength=table.n_markers
        )
    ncomp = u.shape[-1]
    out = np.empty((table.n_markers, ncomp))
    for c in range(ncomp):
        vals = u[..., c].reshape(-1)[table.cells]
        out[:, c] = np.bincount(
            table.marker, weights=vals * table.w_interp, minlength=table.n_markers
        )
    return out


def spread(table, values, target):
    """Accumulate marker values into `target` (in place) and return it.

    Each cell receives value * w_spread * marker_volume / cell_volume, the
    discrete transpose of `interpolate` up to the surface/volume measures.
    """
    values = np.asarray(values, dtype=float)
    factor = (
        table.w_spread * table.marker_volume[table.marker] / table.cell_volume
    )
    ncells = int(np.prod(table.dims))
    if values.ndim == 1:
        acc = np.bincount(
            table.cells, weights=values[table.marker] * factor, minlength=ncells
        )
        target += acc.reshape(table.dims)
        return target
    for c in range(values.shape[1]):
        acc = np.bincount(
            table.cells,
            weights=values[table.marker, c] * factor,
            minlength=ncells,
        )
        target[..., c] += acc.reshape(table.dims)
    return target


def constraint_force(u_b, u_interp, rho, dt):
    """Slip velocity and direct-forcing constraint force density."""
    if dt <= 0:
        raise ConfigurationError("dt must be positive")
    du = np.asarray(u_b, dtype=float) - np.asarray(u_interp, dtype=float)
    return du, (rho / dt) * du


def net_force(f_markers, marker_volume):
    """Net hydrodynamic force on the body: reaction to the fluid forcing.

    `f_markers` is the constraint force density; each marker represents a
    forcing-shell volume ds * h^(d-1).
    """
    f = np.atleast_2d(np.asarray(f_markers, dtype=float))
    return -(f * np.asarray(marker_volume)[:, None]).sum(axis=0)


@dataclass
class ImmersedBody:
    """A marker family with its coupling table and prescribed velocity."""

    markers: object
    table: CouplingTable
    u_b_fn: object                      # callable t -> (n, d)
    name: str = "body"
    last_force: np.ndarray = None       # net hydrodynamic force, last cycle
    last_slip: np.ndarray = None
