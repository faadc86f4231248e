"""Center-curve frames, the tube map, and the inverse Jacobian."""

import numpy as np
import pytest

from tubeflow.coupling import WallState
from tubeflow.errors import GeometryError, MapError, SingularAxisError
from tubeflow.geometry import (
    CenterCurve,
    TubeMapParams,
    evaluate_series_row,
    forward_jacobian,
    frenet_frame,
    inverse_jacobian_rows,
    map_to_physical,
)

from oracles import fd_frenet


def unit_wall(n=32, R=1.0, dR_dt=0.0, length=1.0):
    s = np.linspace(0.0, length, n)
    return WallState.from_radius(s, R, dR_dt=dR_dt)


class TestFrames:
    def test_circular_arc(self):
        curve = CenterCurve.circular_arc(radius=2.0, length=1.0)
        fr = frenet_frame(curve, 0.7)
        assert fr.curvature == pytest.approx(0.5)
        assert fr.torsion == 0.0

    def test_straight_line(self):
        curve = CenterCurve.straight(length=2.0, direction=(1.0, 2.0, 2.0))
        fr0, fr1 = frenet_frame(curve, 0.0), frenet_frame(curve, 1.5)
        assert fr0.curvature == 0.0 and fr0.torsion == 0.0
        assert np.allclose(fr0.normal, fr1.normal)
        assert np.allclose(fr0.binormal, fr1.binormal)

    def test_helix_against_fd_oracle(self):
        # (3 cos th, 3 sin th, 4 th): kappa = 3/25, tau = 4/25
        curve = CenterCurve.helix(a=3.0, b=4.0, length=5.0)
        fr = frenet_frame(curve, 2.0)
        assert fr.curvature == pytest.approx(0.12, abs=1e-12)
        assert fr.torsion == pytest.approx(0.16, abs=1e-12)
        kappa_fd, tau_fd = fd_frenet(curve.point, 2.0)
        assert fr.curvature == pytest.approx(kappa_fd, abs=1e-8)
        assert fr.torsion == pytest.approx(tau_fd, abs=1e-5)

    @pytest.mark.parametrize("make", [
        lambda: CenterCurve.circular_arc(2.0, 1.0),
        lambda: CenterCurve.helix(3.0, 4.0, 5.0),
        lambda: CenterCurve.straight(1.0),
    ])
    def test_orthonormality_everywhere(self, make):
        curve = make()
        for s in np.linspace(0.0, curve.length, 9):
            m = frenet_frame(curve, s).basis_matrix()
            assert np.abs(m @ m.T - np.eye(3)).max() < 1e-12

    @pytest.mark.parametrize("make_curve", [
        lambda: CenterCurve.helix(a=3.0, b=4.0, length=5.0),
        lambda: CenterCurve.from_samples(
            np.linspace(0.0, 5.0, 160),
            np.column_stack([3 * np.cos(np.linspace(0, 1, 160)),
                             3 * np.sin(np.linspace(0, 1, 160)),
                             4 * np.linspace(0, 1, 160)])),
    ])
    def test_frenet_residuals_fd(self, make_curve):
        # T' = kappa N, N' = -kappa T + tau B, B' = -tau N under h^2 FD
        curve = make_curve()
        h = 1e-4
        for s in (1.0, 2.5):
            fr = frenet_frame(curve, s)
            plus, minus = frenet_frame(curve, s + h), frenet_frame(curve, s - h)
            dmat = (plus.basis_matrix() - minus.basis_matrix()) / (2 * h)
            k, t = fr.curvature, fr.torsion
            assert np.linalg.norm(dmat[0] - k * fr.normal) < 1e-5
            assert np.linalg.norm(
                dmat[1] + k * fr.tangent - t * fr.binormal) < 1e-5
            assert np.linalg.norm(dmat[2] + t * fr.normal) < 1e-5


class TestSampledCurves:
    def make_helix_samples(self, n=120):
        c = np.hypot(3.0, 4.0)
        s = np.linspace(0.0, 5.0, n)
        th = s / c
        pts = np.column_stack([3 * np.cos(th), 3 * np.sin(th), 4 * th])
        return s, pts

    def test_sampled_helix_matches_analytic(self):
        s, pts = self.make_helix_samples()
        curve = CenterCurve.from_samples(s, pts)
        fr = curve.frame(2.5)
        assert fr.curvature == pytest.approx(0.12, abs=1e-5)
        assert fr.torsion == pytest.approx(0.16, abs=1e-5)
        assert abs(fr.curvature_rate) < 1e-3 and abs(fr.torsion_rate) < 1e-3
        assert np.allclose(curve.point(2.5),
                           CenterCurve.helix(3, 4, 5).point(2.5), atol=1e-7)

    def test_curvature_rate_of_varying_curve(self):
        # planar curve y = x^2 / 2: kappa(s) varies; rate via FD cross-check
        x = np.linspace(0.0, 1.0, 400)
        y = x**2 / 2
        ds = np.hypot(np.gradient(x), np.gradient(y))
        s = np.cumsum(ds) - ds[0]
        pts = np.column_stack([x, y, np.zeros_like(x)])
        curve = CenterCurve.from_samples(s, pts)
        smid = s[200]
        h = 1e-3
        rate_fd = (curve.frame(smid + h).curvature
                   - curve.frame(smid - h).curvature) / (2 * h)
        assert curve.frame(smid).curvature_rate == pytest.approx(
            rate_fd, rel=1e-3)

    def test_degenerate_samples_rejected(self):
        s = np.array([0.0, 1.0, 2.0, 3.0])
        pts = np.zeros((4, 3))
        pts[:, 0] = [0.0, 1.0, 1.0, 2.0]  # repeated point
        with pytest.raises(GeometryError):
            CenterCurve.from_samples(s, pts)
        with pytest.raises(GeometryError):
            CenterCurve.from_samples([0.0, 1.0, 1.0, 2.0], np.random.rand(4, 3))

    def test_straight_samples_rejected(self):
        s = np.linspace(0.0, 1.0, 10)
        pts = np.column_stack([s, np.zeros(10), np.zeros(10)])
        with pytest.raises(GeometryError):
            CenterCurve.from_samples(s, pts).frame(0.5)

    def test_from_file_roundtrip(self, tmp_path):
        s, pts = self.make_helix_samples()
        path = tmp_path / "curve.csv"
        rows = "\n".join(",".join(f"{v:.12g}" for v in (si, *pi))
                         for si, pi in zip(s, pts))
        path.write_text("s,x,y,z\n" + rows + "\n")
        curve = CenterCurve.from_file(path)
        assert curve.frame(2.5).curvature == pytest.approx(0.12, abs=1e-5)

    def test_from_file_header_required(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c,d\n0,0,0,0\n")
        with pytest.raises(GeometryError):
            CenterCurve.from_file(path)


class TestTubeMap:
    def test_axis_point(self):
        curve = CenterCurve.helix(3.0, 4.0, 5.0)
        params = TubeMapParams(0.1, curve, unit_wall(length=5.0))
        assert np.allclose(map_to_physical(params, 0.0, 2.0, 1.0, 0.0),
                           curve.point(2.0))

    def test_straight_offset(self):
        curve = CenterCurve.straight(1.0, direction=(0, 0, 1))
        params = TubeMapParams(0.1, curve, unit_wall())
        fr = curve.frame(0.5)
        expect = curve.point(0.5) + 0.1 * fr.normal
        assert np.allclose(map_to_physical(params, 0.0, 0.5, 0.0, 1.0), expect)

    def test_invertibility_bound(self):
        curve = CenterCurve.circular_arc(1.0, 1.0)  # kappa = 1
        params = TubeMapParams(0.1, curve, unit_wall())
        assert params.check_invertibility() == pytest.approx(0.1)

    def test_invertibility_violation(self):
        curve = CenterCurve.circular_arc(0.5, 1.0)  # kappa = 2
        params = TubeMapParams(0.6, curve, unit_wall())
        with pytest.raises(MapError):
            map_to_physical(params, 0.0, 0.5, 0.0, 1.0)

    def test_regime_warning(self):
        curve = CenterCurve.circular_arc(1.0, 1.0)
        params = TubeMapParams(0.6, curve, unit_wall())
        with pytest.warns(UserWarning):
            params.check_invertibility()


class TestInverseJacobian:
    def params(self, moving=True):
        curve = CenterCurve.helix(3.0, 4.0, 5.0)
        n = 32
        s = np.linspace(0.0, 5.0, n)
        radius = 1.0 + 0.1 * np.sin(2 * np.pi * s / 5.0)
        rate = 0.3 * np.ones(n) if moving else None
        return TubeMapParams(0.05, curve, WallState.from_radius(s, radius,
                                                                dR_dt=rate))

    def test_straight_row_is_tangent(self):
        curve = CenterCurve.straight(1.0)
        params = TubeMapParams(0.1, curve, unit_wall())
        rows = inverse_jacobian_rows(params, 0.0, 0.5, 0.7, 0.4)
        assert np.allclose(rows.ds1_dx, [1.0, 0.0, 0.0])

    def test_rigid_wall_time_row_zero(self):
        params = self.params(moving=False)
        rows = inverse_jacobian_rows(params, 0.0, 2.0, 0.7, 0.4)
        assert np.allclose(rows.ds_dt, 0.0)

    def test_moving_wall_time_row(self):
        params = self.params()
        s1, s3 = 2.0, 0.4
        rows = inverse_jacobian_rows(params, 0.0, s1, 0.7, s3)
        expect = -s3 * params.wall.rate_at(s1) / params.wall.radius_at(s1)
        assert rows.ds_dt[2] == pytest.approx(expect)
        assert rows.ds_dt[0] == rows.ds_dt[1] == 0.0

    def test_product_with_forward_jacobian_is_identity(self):
        params = self.params()
        rng = np.random.default_rng(42)
        for _ in range(12):
            s1 = rng.uniform(0.1, 4.9)
            s2 = rng.uniform(0.0, 2 * np.pi)
            s3 = rng.uniform(0.05, 1.0)
            rows = inverse_jacobian_rows(params, 0.0, s1, s2, s3)
            inv = np.vstack([rows.ds1_dx, rows.ds2_dx, rows.ds3_dx])
            fwd, dx_dt = forward_jacobian(params, 0.0, s1, s2, s3)
            assert np.abs(inv @ fwd - np.eye(3)).max() < 1e-12
            # time row consistency: ds/dt = -(grad s) dx/dt
            assert np.allclose(rows.ds_dt, -inv @ dx_dt, atol=1e-13)

    def test_axis_singularity(self):
        params = self.params()
        with pytest.raises(SingularAxisError):
            inverse_jacobian_rows(params, 0.0, 2.0, 0.3, 0.0)

    def test_eps_series_order_five(self):
        # truncated at k = 4 the series error scales like eps^5; a tight
        # helix keeps the signal above round-off at both eps values
        curve = CenterCurve.helix(0.2, 0.1, 1.0)  # kappa = 4, tau = 2
        n = 32
        s = np.linspace(0.0, 1.0, n)
        radius = 1.2 + 0.1 * np.sin(2 * np.pi * s)
        wall = WallState.from_radius(s, radius, dR_dt=0.3 * np.ones(n))
        point = (0.5, 0.1, 1.0)
        errs = {}
        for eps in (1e-2, 1e-3):
            params = TubeMapParams(eps, curve, wall)
            rows = inverse_jacobian_rows(params, 0.0, *point, series_order=4)
            exact = np.vstack([rows.ds1_dx, rows.ds2_dx, rows.ds3_dx])
            approx = np.vstack([evaluate_series_row(rows, q, eps, 4)
                                for q in (1, 2, 3)])
            # the 1/eps (normal/binormal) parts are represented exactly
            assert np.allclose(exact[:, 1:], approx[:, 1:], rtol=1e-14)
            errs[eps] = np.abs(exact[:, 0] - approx[:, 0]).max()
        ratio = errs[1e-2] / errs[1e-3]
        assert 1e5 / 2 < ratio < 1e5 * 2