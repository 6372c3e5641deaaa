"""Per-marker generating functions by constrained weighted least squares.

Given a stencil of interpolation points with base kernel weights W and a
0/1 mask H restricting the active side of the interface, the generating
weights psi minimize the W-weighted norm subject to constant and linear
polynomial reproduction.  The solution goes through the small Gram system

    G = A diag(W*H) A^T,   lambda = G^{-1} P,   psi = (W*H) * (A^T lambda)

with P = (1, 0, ..., 0)^T because the polynomial basis is centered on the
evaluation point.  Two mollification shifts (constant and weight
proportional) restore nonnegativity at the cost of the first moment.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import IBMLSError, NearSingularGram

RCOND_THRESHOLD = 1e-12


class ShiftMode(Enum):
    NONE = "none"
    CVS = "cvs"
    NCVS = "ncvs"


@dataclass
class Stencil:
    """One marker's interpolation points and base weights.

    points : (N, d) coordinates of the cell centers in the stencil
    indices : (N, d) integer grid indices of those cells
    X : (d,) evaluation (marker) position
    W : (N,) base kernel weights, nonnegative
    H : (N,) mask, 0 on the inactive side, 1 on the active side
    h : grid spacing (scalar, uniform)
    marker_id : optional id used in error reports
    """

    points: np.ndarray
    indices: np.ndarray
    X: np.ndarray
    W: np.ndarray
    H: np.ndarray
    h: float
    marker_id: int | None = None


@dataclass
class GeneratingWeights:
    """MLS output for one stencil: psi plus the intermediate quantities."""

    psi: np.ndarray
    lam: np.ndarray
    L: np.ndarray
    w_mls: np.ndarray
    H: np.ndarray
    shift_mode: ShiftMode = ShiftMode.NONE
    c: float = 0.0
    psi_m: np.ndarray | None = None


def polynomial_matrix(points, X):
    """Matrix of the linear polynomial basis (1, x-X, ...) at the points.

    Shape (d+1, N); first row is all ones.
    """
    points = np.asarray(points, dtype=float)
    X = np.asarray(X, dtype=float)
    n, d = points.shape
    A = np.empty((d + 1, n))
    A[0] = 1.0
    A[1:] = (points - X).T
    return A


def gram_matrix(A, W):
    """Weighted Gram matrix G = A diag(W) A^T (symmetric, (d+1)x(d+1))."""
    return (A * np.asarray(W, dtype=float)) @ A.T


def _reciprocal_condition(G):
    s = np.linalg.svd(G, compute_uv=False)
    if s[0] == 0.0:
        return 0.0
    return s[-1] / s[0]


def generating_weights(stencil, rcond_threshold=RCOND_THRESHOLD):
    """Solve the constrained least-squares problem for one stencil.

    Returns GeneratingWeights with psi, lambda and L = A^T lambda; psi_m is
    left unset.  Raises NearSingularGram when the reciprocal condition
    estimate of the Gram matrix falls below `rcond_threshold`.
    """
    w_mls = stencil.W * stencil.H
    A = polynomial_matrix(stencil.points, stencil.X)
    G = gram_matrix(A, w_mls)
    if _reciprocal_condition(G) < rcond_threshold:
        raise NearSingularGram(
            f"near-singular Gram matrix (marker {stencil.marker_id})",
            marker_id=stencil.marker_id,
        )
    P = np.zeros(A.shape[0])
    P[0] = 1.0
    lam = np.linalg.solve(G, P)
    L = A.T @ lam
    psi = w_mls * L
    return GeneratingWeights(psi=psi, lam=lam, L=L, w_mls=w_mls, H=stencil.H)


def shift_cvs(gw):
    """Constant vector shift restricted to the active side.

    c is the smallest value making every entry nonnegative; the shifted
    weights are renormalized to unit sum.
    """
    active = gw.H > 0.0
    c = abs(min(0.0, float(gw.psi[active].min())))
    shifted = gw.psi + c * gw.H
    denom = shifted.sum()
    if denom <= 1e-14:
        raise IBMLSError("degenerate normalizer in CVS shift")
    gw.psi_m = shifted / denom
    gw.shift_mode = ShiftMode.CVS
    gw.c = c
    return gw


def shift_ncvs(gw):
    """Weight-proportional shift: psi_m = W_mls*(L + c) / sum(psi + c*W_mls).

    c is the smallest value making L + c nonnegative on the active side, so
    psi_m >= 0 and inherits the decay profile of the base weights.
    """
    active = gw.H > 0.0
    c = abs(min(0.0, float(gw.L[active].min())))
    denom = (gw.psi + c * gw.w_mls).sum()
    if denom <= 1e-14:
        raise IBMLSError("degenerate normalizer in NCVS shift")
    gw.psi_m = gw.w_mls * (gw.L + c) / denom
    gw.shift_mode = ShiftMode.NCVS
    gw.c = c
    return gw


def shift(gw, mode):
    """Apply the named shift; ShiftMode.NONE sets psi_m = psi."""
    if mode is ShiftMode.NONE:
        gw.psi_m = gw.psi.copy()
        gw.shift_mode = ShiftMode.NONE
        gw.c = 0.0
        return gw
    if mode is ShiftMode.CVS:
        return shift_cvs(gw)
    if mode is ShiftMode.NCVS:
        return shift_ncvs(gw)
    raise ValueError(f"unknown shift mode {mode!r}")
