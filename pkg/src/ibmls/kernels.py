"""One-dimensional regularized interpolation kernels and their tensor products.

All kernels are even, compactly supported functions of the dimensionless
offset r = (x - X)/h.  The dimensional 1/h^d factor of a regularized delta
function is deliberately *not* applied here; the coupling layer works with
dimensionless weights throughout.
"""

from enum import Enum

import numpy as np

from .errors import ConfigurationError


class KernelKind(Enum):
    THREE_POINT = "smoothed3"
    PESKIN_FOUR = "peskin4"
    RBF = "rbf"
    CUBIC_SPLINE_TWO = "spline2"
    SPLINE_FIVE = "spline5"
    SPLINE_SIX = "spline6"
    # Five/six-point kernels with weakened second-moment conditions.  Their
    # closed forms are not reproduced here; evaluation raises.
    FIVE_POINT_NEW = "delta5new"
    SIX_POINT_NEW = "delta6new"


# Half support width in grid cells.  Evaluation is exactly zero at and
# beyond these offsets.
_HALF_WIDTH = {
    KernelKind.THREE_POINT: 1.5,
    KernelKind.PESKIN_FOUR: 2.0,
    KernelKind.RBF: 2.0,
    KernelKind.CUBIC_SPLINE_TWO: 1.2,
    KernelKind.SPLINE_FIVE: 2.5,
    KernelKind.SPLINE_SIX: 3.0,
}


def kernel_from_name(name):
    """Map a config string like "peskin4" to a KernelKind."""
    for kind in KernelKind:
        if kind.value == name:
            return kind
    raise ConfigurationError(f"unknown kernel {name!r}")


def half_support(kind):
    """Half support width of `kind` in grid cells."""
    try:
        return _HALF_WIDTH[kind]
    except KeyError:
        raise ConfigurationError(
            f"kernel {kind.value!r} is declared but its closed form is not "
            "implemented"
        ) from None


def _three_point(r):
    out = np.zeros_like(r)
    m = r < 0.5
    out[m] = 0.75 - r[m] ** 2
    m = (0.5 <= r) & (r < 1.5)
    out[m] = 0.5 * (2.25 - 3.0 * r[m] + r[m] ** 2)
    return out


def _peskin_four(r):
    out = np.zeros_like(r)
    m = r < 1.0
    out[m] = (3.0 - 2.0 * r[m] + np.sqrt(1.0 + 4.0 * r[m] - 4.0 * r[m] ** 2)) / 8.0
    m = (1.0 <= r) & (r < 2.0)
    out[m] = (5.0 - 2.0 * r[m] - np.sqrt(-7.0 + 12.0 * r[m] - 4.0 * r[m] ** 2)) / 8.0
    return out


def _rbf(r):
    # Truncated Gaussian; not renormalized, so it does not sum to one on
    # the lattice.  Kept as a generic (non moment-satisfying) weight.
    out = np.zeros_like(r)
    m = r < 2.0
    out[m] = np.exp(-2.0 * r[m] ** 2)
    return out


def _cubic_spline_two(r):
    # Cubic spline of Vanella & Balaras, 2.4 grid cells wide: rb = r/1.2.
    rb = r / 1.2
    out = np.zeros_like(r)
    m = rb < 0.5
    out[m] = 2.0 / 3.0 - 4.0 * rb[m] ** 2 + 4.0 * rb[m] ** 3
    m = (0.5 <= rb) & (rb < 1.0)
    out[m] = 4.0 / 3.0 - 4.0 * rb[m] + 4.0 * rb[m] ** 2 - (4.0 / 3.0) * rb[m] ** 3
    return out


def _spline_five(r):
    k = r + 2.5
    out = np.zeros_like(r)
    m = r < 0.5
    out[m] = (6 * k[m] ** 4 - 60 * k[m] ** 3 + 210 * k[m] ** 2 - 300 * k[m] + 155) / 24
    m = (0.5 <= r) & (r < 1.5)
    out[m] = (-4 * k[m] ** 4 + 60 * k[m] ** 3 - 330 * k[m] ** 2 + 780 * k[m] - 655) / 24
    m = (1.5 <= r) & (r < 2.5)
    out[m] = (k[m] ** 4 - 20 * k[m] ** 3 + 150 * k[m] ** 2 - 500 * k[m] + 625) / 24
    return out


def _spline_six(r):
    k = r + 3.0
    out = np.zeros_like(r)
    m = r < 1.0
    out[m] = (
        -5 * k[m] ** 5 + 90 * k[m] ** 4 - 630 * k[m] ** 3
        + 2130 * k[m] ** 2 - 3465 * k[m] + 2193
    ) / 60
    m = (1.0 <= r) & (r < 2.0)
    out[m] = (
        5 * k[m] ** 5 - 120 * k[m] ** 4 + 1140 * k[m] ** 3
        - 5340 * k[m] ** 2 + 12270 * k[m] - 10974
    ) / 120
    m = (2.0 <= r) & (r < 3.0)
    out[m] = (
        -k[m] ** 5 + 30 * k[m] ** 4 - 360 * k[m] ** 3
        + 2160 * k[m] ** 2 - 6480 * k[m] + 7776
    ) / 120
    return out


_EVAL = {
    KernelKind.THREE_POINT: _three_point,
    KernelKind.PESKIN_FOUR: _peskin_four,
    KernelKind.RBF: _rbf,
    KernelKind.CUBIC_SPLINE_TWO: _cubic_spline_two,
    KernelKind.SPLINE_FIVE: _spline_five,
    KernelKind.SPLINE_SIX: _spline_six,
}


def eval1d(kind, r):
    """Evaluate the 1D kernel at dimensionless offset(s) r.

    Accepts scalars or arrays; returns the same shape.  Exactly zero for
    |r| >= half_support(kind).
    """
    try:
        fn = _EVAL[kind]
    except KeyError:
        raise ConfigurationError(
            f"kernel {getattr(kind, 'value', kind)!r} cannot be evaluated"
        ) from None
    arr = np.abs(np.asarray(r, dtype=float))
    out = fn(arr.ravel()).reshape(arr.shape)
    if np.ndim(r) == 0:
        return float(out)
    return out


def eval_tensor(kind, offsets):
    """Tensor-product kernel: product of eval1d over the d components.

    `offsets` is a sequence of 1 to 3 dimensionless offsets (or arrays of
    matching shapes).  No 1/h^d scaling is applied.
    """
    offsets = list(offsets)
    if not 1 <= len(offsets) <= 3:
        raise ConfigurationError("tensor kernels support 1 to 3 dimensions")
    w = eval1d(kind, offsets[0])
    for r in offsets[1:]:
        w = w * eval1d(kind, r)
    return w
