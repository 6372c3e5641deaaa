import numpy as np
import pytest

from ibmls.errors import NearSingularGram
from ibmls.kernels import KernelKind, eval1d, half_support
from ibmls.mls import (
    ShiftMode,
    Stencil,
    generating_weights,
    gram_matrix,
    polynomial_matrix,
    shift,
    shift_cvs,
    shift_ncvs,
)

MOMENT_KERNELS = (
    KernelKind.THREE_POINT,
    KernelKind.PESKIN_FOUR,
    KernelKind.SPLINE_FIVE,
    KernelKind.SPLINE_SIX,
)


def lattice_stencil(kind, X, h=1.0, mask_fn=None, ndim=2):
    """Full lattice stencil around marker X with unit spacing by default."""
    X = np.asarray(X, dtype=float)
    half = half_support(kind)
    axes = []
    for a in range(ndim):
        lo = int(np.floor(X[a] / h - half)) - 1
        hi = int(np.ceil(X[a] / h + half)) + 1
        axes.append(np.arange(lo, hi + 1))
    mesh = np.meshgrid(*axes, indexing="ij")
    idx = np.column_stack([m.ravel() for m in mesh])
    pts = idx * h
    r = (pts - X) / h
    keep = np.all(np.abs(r) < half - 1e-12, axis=1)
    pts, idx = pts[keep], idx[keep]
    W = np.ones(len(pts))
    for a in range(ndim):
        W *= eval1d(kind, (pts[:, a] - X[a]) / h)
    H = np.ones(len(pts)) if mask_fn is None else \
        mask_fn(pts).astype(float)
    return Stencil(points=pts, indices=idx, X=X, W=W, H=H, h=h)


class TestBasics:
    def test_polynomial_matrix(self):
        pts = np.array([[0.0, 0.0], [1.0, 2.0]])
        A = polynomial_matrix(pts, np.array([0.5, 0.5]))
        np.testing.assert_allclose(A[0], [1.0, 1.0])
        np.testing.assert_allclose(A[1], [-0.5, 0.5])
        np.testing.assert_allclose(A[2], [-0.5, 1.5])

    def test_gram_symmetric(self):
        rng = np.random.default_rng(0)
        pts = rng.normal(size=(20, 2))
        A = polynomial_matrix(pts, np.zeros(2))
        W = rng.uniform(0.1, 1.0, size=20)
        G = gram_matrix(A, W)
        np.testing.assert_allclose(G, G.T, atol=1e-14)
        assert np.all(np.linalg.eigvalsh(G) > 0)


class TestLemmaFullSupport:
    """With full support, moment-satisfying kernels are MLS fixed points."""

    @pytest.mark.parametrize("kind", MOMENT_KERNELS)
    def test_psi_equals_w(self, kind):
        rng = np.random.default_rng(21)
        for _ in range(25):
            X = rng.uniform(-0.5, 0.5, size=2)
            st = lattice_stencil(kind, X)
            gw = generating_weights(st)
            assert np.abs(gw.psi - st.W).max() < 1e-10
            assert np.abs(gw.L - 1.0).max() < 1e-10

    def test_rbf_is_transformed(self):
        # a non moment-satisfying kernel must be corrected by the MLS
        st = lattice_stencil(KernelKind.RBF, np.array([0.2, -0.3]))
        gw = generating_weights(st)
        assert np.abs(gw.psi - st.W).max() > 1e-3
        A = polynomial_matrix(st.points, st.X)
        np.testing.assert_allclose(A @ gw.psi, [1.0, 0.0, 0.0], atol=1e-12)


class TestOneSided:
    @staticmethod
    def interface_mask(X):
        # half-plane interface passing through the marker itself
        return lambda pts: pts[:, 1] >= X[1]

    def test_reproduction_half_plane(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            X = rng.uniform(-0.5, 0.5, size=2)
            st = lattice_stencil(KernelKind.PESKIN_FOUR, X,
                                 mask_fn=self.interface_mask(X))
            gw = generating_weights(st)
            A = polynomial_matrix(st.points, st.X)
            P = np.array([1.0, 0.0, 0.0])
            assert np.abs(A @ gw.psi - P).max() < 1e-9
            # masked cells carry exactly zero weight
            assert np.all(gw.psi[st.H == 0.0] == 0.0)

    def test_reproduction_circle_mask(self):
        rng = np.random.default_rng(6)
        R = 4.0
        for _ in range(50):
            theta = rng.uniform(0, 2 * np.pi)
            X = R * np.array([np.cos(theta), np.sin(theta)])
            st = lattice_stencil(
                KernelKind.PESKIN_FOUR, X,
                mask_fn=lambda p: (p**2).sum(axis=1) >= R**2,
            )
            gw = generating_weights(st)
            A = polynomial_matrix(st.points, st.X)
            assert np.abs(A @ gw.psi - [1.0, 0.0, 0.0]).max() < 1e-9

    @pytest.mark.parametrize("shifter", (shift_cvs, shift_ncvs))
    def test_shift_properties(self, shifter):
        rng = np.random.default_rng(9)
        for _ in range(50):
            X = rng.uniform(-0.5, 0.5, size=2)
            st = lattice_stencil(KernelKind.PESKIN_FOUR, X,
                                 mask_fn=self.interface_mask(X))
            gw = shifter(generating_weights(st))
            assert abs(gw.psi_m.sum() - 1.0) < 1e-12
            assert gw.psi_m.min() >= -1e-14
            assert np.all(gw.psi_m[st.H == 0.0] == 0.0)

    def test_shift_none_copies_psi(self):
        st = lattice_stencil(KernelKind.PESKIN_FOUR, np.array([0.1, 0.2]))
        gw = shift(generating_weights(st), ShiftMode.NONE)
        np.testing.assert_array_equal(gw.psi_m, gw.psi)

    def test_unshifted_needed(self):
        # the one-sided psi genuinely has negative entries, so the shifts
        # are not no-ops
        X = np.array([0.0, 0.3])
        st = lattice_stencil(KernelKind.PESKIN_FOUR, X,
                             mask_fn=self.interface_mask(X))
        gw = generating_weights(st)
        assert gw.psi.min() < -1e-6


class TestConstantShiftMoments:
    """First-moment behavior of the unrestricted constant shift.

    Adding the same constant to every stencil weight preserves the first
    moment exactly when the evaluation point sits on a cell center (the
    offsets then cancel in symmetric pairs) and breaks it otherwise.
    """

    @staticmethod
    def moments(st, w):
        A = polynomial_matrix(st.points, st.X)
        return A @ w

    def test_on_center_preserved(self):
        for kind in (KernelKind.PESKIN_FOUR, KernelKind.SPLINE_SIX):
            st = lattice_stencil(kind, np.array([3.0, -2.0]))
            c = 0.37
            shifted = (st.W + c) / (st.W + c).sum()
            m = self.moments(st, shifted)
            assert np.abs(m[1:]).max() < 1e-12

    def test_off_center_broken(self):
        st = lattice_stencil(KernelKind.PESKIN_FOUR, np.array([0.31, -0.12]))
        c = 0.37
        shifted = (st.W + c) / (st.W + c).sum()
        m = self.moments(st, shifted)
        assert np.abs(m[1:]).max() > 1e-6


class TestNearSingular:
    def test_collinear_active_cells(self):
        # active cells all on one lattice row: the linear-in-y basis row is
        # dependent on the constant row
        st = lattice_stencil(
            KernelKind.THREE_POINT, np.array([0.0, 0.4]),
            mask_fn=lambda p: p[:, 1] >= 0.9,
        )
        with pytest.raises(NearSingularGram):
            generating_weights(st)

    def test_error_carries_marker_id(self):
        st = lattice_stencil(
            KernelKind.THREE_POINT, np.array([0.0, 0.4]),
            mask_fn=lambda p: p[:, 1] >= 0.9,
        )
        st.marker_id = 17
        with pytest.raises(NearSingularGram) as exc:
            generating_weights(st)
        assert exc.value.marker_id == 17

    def test_empty_active_side(self):
        st = lattice_stencil(
            KernelKind.PESKIN_FOUR, np.array([0.0, 0.0]),
            mask_fn=lambda p: np.zeros(len(p), dtype=bool),
        )
        with pytest.raises(NearSingularGram):
            generating_weights(st)


class Test3D:
    def test_masked_sphere_reproduction(self):
        rng = np.random.default_rng(33)
        R = 5.0
        for _ in range(10):
            v = rng.normal(size=3)
            X = R * v / np.linalg.norm(v)
            st = lattice_stencil(
                KernelKind.PESKIN_FOUR, X, ndim=3,
                mask_fn=lambda p: (p**2).sum(axis=1) >= R**2,
            )
            gw = generating_weights(st)
            A = polynomial_matrix(st.points, st.X)
            P = np.zeros(4)
            P[0] = 1.0
            assert np.abs(A @ gw.psi - P).max() < 1e-9
