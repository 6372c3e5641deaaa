import numpy as np
import pytest

from ibmls.errors import ConfigurationError
from ibmls.kernels import KernelKind, eval1d, eval_tensor, half_support, kernel_from_name

MOMENT_KERNELS = (
    KernelKind.THREE_POINT,
    KernelKind.PESKIN_FOUR,
    KernelKind.SPLINE_FIVE,
    KernelKind.SPLINE_SIX,
)

ALL_IMPLEMENTED = MOMENT_KERNELS + (
    KernelKind.RBF,
    KernelKind.CUBIC_SPLINE_TWO,
)


def lattice_offsets(kind, shift):
    """Grid offsets i - shift covering the support for a marker at `shift`."""
    half = half_support(kind)
    i = np.arange(-10, 11)
    return i - shift


class TestNames:
    def test_roundtrip(self):
        for kind in KernelKind:
            assert kernel_from_name(kind.value) is kind

    def test_unknown_name(self):
        with pytest.raises(ConfigurationError):
            kernel_from_name("peskin3000")

    def test_declared_but_unimplemented(self):
        for kind in (KernelKind.FIVE_POINT_NEW, KernelKind.SIX_POINT_NEW):
            with pytest.raises(ConfigurationError):
                half_support(kind)
            with pytest.raises(ConfigurationError):
                eval1d(kind, 0.0)


class TestShape:
    def test_scalar_and_array_input(self):
        v = eval1d(KernelKind.PESKIN_FOUR, 0.0)
        assert np.isscalar(v) or np.ndim(v) == 0
        arr = eval1d(KernelKind.PESKIN_FOUR, np.linspace(-3, 3, 11))
        assert arr.shape == (11,)

    def test_even_symmetry(self):
        r = np.linspace(0.0, 3.5, 200)
        for kind in ALL_IMPLEMENTED:
            np.testing.assert_allclose(
                eval1d(kind, r), eval1d(kind, -r), atol=1e-14
            )

    def test_compact_support(self):
        for kind in ALL_IMPLEMENTED:
            half = half_support(kind)
            r = np.array([half, half + 0.25, half + 2.0, -half, -half - 1.0])
            assert np.all(eval1d(kind, r) == 0.0)

    def test_nonnegative(self):
        r = np.linspace(-3.5, 3.5, 1001)
        for kind in ALL_IMPLEMENTED:
            assert eval1d(kind, r).min() >= -1e-14

    def test_continuity_at_breakpoints(self):
        # piecewise branches must agree at the seams
        eps = 1e-9
        breaks = {
            KernelKind.THREE_POINT: (0.5, 1.5),
            KernelKind.PESKIN_FOUR: (1.0, 2.0),
            KernelKind.SPLINE_FIVE: (0.5, 1.5, 2.5),
            KernelKind.SPLINE_SIX: (1.0, 2.0, 3.0),
            KernelKind.CUBIC_SPLINE_TWO: (0.6, 1.2),
        }
        for kind, pts in breaks.items():
            for b in pts:
                lo = eval1d(kind, b - eps)
                hi = eval1d(kind, b + eps)
                assert abs(lo - hi) < 1e-6, (kind, b, lo, hi)


class TestMoments:
    """Discrete moment sums over the integer lattice at arbitrary shifts."""

    @pytest.mark.parametrize("kind", MOMENT_KERNELS)
    def test_zeroth_moment(self, kind):
        rng = np.random.default_rng(7)
        for shift in rng.uniform(-0.5, 0.5, size=50):
            w = eval1d(kind, lattice_offsets(kind, shift))
            assert abs(w.sum() - 1.0) < 1e-12

    @pytest.mark.parametrize(
        "kind", (KernelKind.PESKIN_FOUR, KernelKind.SPLINE_FIVE,
                 KernelKind.SPLINE_SIX)
    )
    def test_first_moment(self, kind):
        rng = np.random.default_rng(11)
        i = np.arange(-10, 11)
        for shift in rng.uniform(-0.5, 0.5, size=50):
            w = eval1d(kind, i - shift)
            assert abs((w * (i - shift)).sum()) < 1e-12

    def test_cubic_spline_two_zeroth_moment_deficit(self):
        # the compressed cubic spline integrates to 0.6, so its lattice sum
        # is far from one; coupling must renormalize it
        w = eval1d(KernelKind.CUBIC_SPLINE_TWO, lattice_offsets(
            KernelKind.CUBIC_SPLINE_TWO, 0.25))
        assert abs(w.sum() - 1.0) > 0.1

    def test_rbf_not_normalized(self):
        w = eval1d(KernelKind.RBF, lattice_offsets(KernelKind.RBF, 0.3))
        assert abs(w.sum() - 1.0) > 1e-3


class TestReferenceValues:
    def test_peskin_four_center(self):
        # closed form at r = 0: (3 + 1)/8
        assert abs(eval1d(KernelKind.PESKIN_FOUR, 0.0) - 0.5) < 1e-15

    def test_peskin_four_on_integers(self):
        # on-lattice evaluation: 1/2 at 0, 1/4 at the neighbors
        w = eval1d(KernelKind.PESKIN_FOUR, np.array([-1.0, 0.0, 1.0]))
        np.testing.assert_allclose(w, [0.25, 0.5, 0.25], atol=1e-14)

    def test_three_point_center(self):
        assert abs(eval1d(KernelKind.THREE_POINT, 0.0) - 0.75) < 1e-15

    def test_spline_five_center(self):
        # quartic B-spline scaled form: value 115/192 at r = 0
        assert abs(eval1d(KernelKind.SPLINE_FIVE, 0.0) - 115.0 / 192.0) < 1e-12

    def test_spline_six_center(self):
        # quintic B-spline: value 11/20 at r = 0
        assert abs(eval1d(KernelKind.SPLINE_SIX, 0.0) - 11.0 / 20.0) < 1e-12


class TestTensor:
    def test_tensor_product_2d(self):
        rx = np.array([0.25, 1.0])
        ry = np.array([-0.3, 0.5])
        w = eval_tensor(KernelKind.PESKIN_FOUR, (rx, ry))
        expect = (eval1d(KernelKind.PESKIN_FOUR, rx)
                  * eval1d(KernelKind.PESKIN_FOUR, ry))
        np.testing.assert_allclose(w, expect, rtol=1e-15)

    def test_tensor_moment_3d(self):
        rng = np.random.default_rng(3)
        shift = rng.uniform(-0.5, 0.5, size=3)
        g = np.arange(-3, 4)
        pts = np.stack(np.meshgrid(g, g, g, indexing="ij"), axis=-1)
        offs = pts.reshape(-1, 3) - shift
        w = eval_tensor(KernelKind.PESKIN_FOUR,
                        (offs[:, 0], offs[:, 1], offs[:, 2]))
        assert abs(w.sum() - 1.0) < 1e-12
        m1 = (w[:, None] * offs).sum(axis=0)
        assert np.abs(m1).max() < 1e-12
