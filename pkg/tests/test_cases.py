"""Tests for exact solutions, diagnostics, and the benchmark drivers."""

import math

import numpy as np
import pytest

from ibmls import cases, errors


class TestTaylorGreenExact:
    def test_initial_values(self):
        u, v, p = cases.taylor_green_exact(0.0, 0.0, 0.0, 100.0)
        assert u == pytest.approx(0.0, abs=1e-15)
        assert v == pytest.approx(0.0, abs=1e-15)
        assert p == pytest.approx(-0.5)

    def test_decay_rate(self):
        re = 100.0
        u0, _, _ = cases.taylor_green_exact(0.3, 0.7, 0.0, re)
        u1, _, _ = cases.taylor_green_exact(0.3, 0.7, 1.0, re)
        assert u1 == pytest.approx(u0 * math.exp(-2.0 * np.pi**2 / re))

    def test_divergence_free(self):
        eps = 1e-6
        x, y, t, re = 0.4, -0.9, 0.3, 50.0
        dudx = (cases.taylor_green_exact(x + eps, y, t, re)[0]
                - cases.taylor_green_exact(x - eps, y, t, re)[0]) / (2 * eps)
        dvdy = (cases.taylor_green_exact(x, y + eps, t, re)[1]
                - cases.taylor_green_exact(x, y - eps, t, re)[1]) / (2 * eps)
        assert dudx + dvdy == pytest.approx(0.0, abs=1e-8)


class TestStokesExact:
    def test_wall_value(self):
        assert cases.stokes_exact(0.0, 1.0, 500.0) == pytest.approx(1.0)

    def test_far_field(self):
        assert cases.stokes_exact(10.0, 0.01, 500.0) == pytest.approx(0.0, abs=1e-12)

    def test_profile_is_erfc(self):
        re, t, y = 500.0, 2.0, 0.05
        nu = 1.0 / re
        want = math.erfc(y / (2.0 * math.sqrt(nu * t)))
        assert cases.stokes_exact(y, t, re) == pytest.approx(want)

    def test_negative_time_rejected(self):
        with pytest.raises(errors.ConfigurationError):
            cases.stokes_exact(0.1, 0.0, 500.0)

    def test_cd_value(self):
        # C_D = 2 / sqrt(pi t Re)
        assert cases.stokes_cd(5.0, 500.0) == pytest.approx(
            2.0 / math.sqrt(math.pi * 5.0 * 500.0))
        assert cases.stokes_cd(1.0, 500.0) == pytest.approx(0.0504626504404032)


class TestDiagnostics:
    def test_error_norms_zero(self):
        a = np.ones((8, 8))
        n = cases.error_norms(a, a)
        assert n["L1"] == n["L2"] == n["Linf"] == 0.0

    def test_error_norms_values(self):
        num = np.zeros(4)
        exact = np.array([1.0, -1.0, 1.0, -1.0])
        n = cases.error_norms(num, exact)
        assert n["L1"] == pytest.approx(1.0)
        assert n["L2"] == pytest.approx(1.0)
        assert n["Linf"] == pytest.approx(1.0)

    def test_error_norms_mask(self):
        num = np.array([0.0, 5.0])
        exact = np.array([0.0, 0.0])
        mask = np.array([True, False])
        assert cases.error_norms(num, exact, mask)["Linf"] == 0.0
        with pytest.raises(errors.ConfigurationError):
            cases.error_norms(num, exact, np.zeros(2, dtype=bool))

    def test_drag_coefficient(self):
        # C_D = F / (0.5 rho U^2 L)
        assert cases.drag_coefficient(2.0, 1.0, 1.0, 1.0) == pytest.approx(4.0)
        assert cases.drag_coefficient(1.0, 2.0, 2.0, 0.5) == pytest.approx(0.5)

    def test_wake_bubble_length(self):
        s = np.linspace(0.0, 2.0, 201)
        u = np.where(s < 0.9, -0.1, 0.2)  # reverse flow out to s = 0.9
        lb = cases.wake_bubble_length(s, u)
        assert lb == pytest.approx(0.9, abs=0.02)

    def test_wake_bubble_no_reverse_flow(self):
        s = np.linspace(0.0, 2.0, 50)
        assert cases.wake_bubble_length(s, np.ones_like(s)) == 0.0

    def test_interior_rms(self):
        u = np.zeros((4, 4, 2))
        u[..., 0] = 2.0
        H = np.ones((4, 4))
        H[1:3, 1:3] = 0.0
        assert cases.interior_rms(u, H) == pytest.approx(2.0)
        with pytest.raises(errors.ConfigurationError):
            cases.interior_rms(u, np.ones((4, 4)))

    def test_fit_order(self):
        hs = [0.1, 0.05, 0.025]
        errs = [4e-2 * (h / 0.1) ** 2 for h in hs]
        assert cases.fit_order(hs, errs) == pytest.approx(2.0)


class TestDrivers:
    def test_taylor_green_smoke(self):
        out = cases.run_taylor_green(32, re=100.0, cfl=0.2, t_end=0.05,
                                     method="direct")
        assert out["u"]["L2"] < 0.05
        assert out["h"] == pytest.approx(4.0 / 32)

    def test_taylor_green_orientations_smoke(self):
        for orientation in ("interior", "both"):
            out = cases.run_taylor_green(32, re=100.0, cfl=0.2, t_end=0.05,
                                         method="direct",
                                         orientation=orientation)
            assert np.isfinite(out["u"]["L2"])

    def test_convergence_driver_shape(self):
        out = cases.taylor_green_convergence(ns=(32, 64), re=100.0, cfl=0.2,
                                             t_end=0.05, method="direct")
        assert len(out["results"]) == 2
        assert np.isfinite(out["order_u"])

    def test_stokes_smoke(self):
        out = cases.run_stokes(n=64, re=500.0, cfl=0.2, t_end=0.2)
        # wall layer: numeric profile decays away from the plate
        prof = out["profile"]
        imax = np.argmax(np.abs(prof))
        assert abs(prof[imax]) > 2 * abs(prof[(imax + len(prof) // 4) % len(prof)])
        for row in out["timeseries"]:
            assert all(np.isfinite(v) for v in row.values())

    def test_impulsive_cylinder_smoke(self):
        out = cases.run_impulsive_cylinder(h=0.1, t_end=0.3, cfl=0.25,
                                           interp="standard")
        assert out["timeseries"][-1]["CD"] > 0.0  # positive drag
        assert np.isfinite(out["interior_rms"])

    def test_oscillating_cylinder_smoke(self):
        out = cases.run_oscillating_cylinder(h=0.1, n_periods=0.25)
        for row in out["timeseries"]:
            assert all(np.isfinite(v) for v in row.values())

    def test_impulsive_plate_smoke(self):
        out = cases.run_impulsive_plate(h=0.1, t_end=0.5)
        assert np.isfinite(out["final_bubble"])
