"""Center-curve geometry, Frenet apparatus, and the tube coordinate map.

The pipe interior is the image of the reference domain
[0, L] x [0, 2 pi] x [0, 1] under

    x(t, s1, s2, s3) = c(s1) + eps * s3 * R(t, s1) * (cos s2 N + sin s2 B),

where (T, N, B) is the Frenet frame of the center curve c.  This module
provides the frame (with curvature/torsion and their rates), the map, and
the rows of the inverse Jacobian both exactly and as a power series in eps.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import GeometryError, MapError, SingularAxisError

_ORTHO_TOL = 1e-12


@dataclass(frozen=True)
class FrenetFrame:
    """Orthonormal frame and curvature data at one arc-length station."""

    tangent: np.ndarray
    normal: np.ndarray
    binormal: np.ndarray
    curvature: float
    curvature_rate: float
    torsion: float
    torsion_rate: float

    def basis_matrix(self) -> np.ndarray:
        """Rows are (T, N, B) components in the world basis (v_ki)."""
        return np.vstack([self.tangent, self.normal, self.binormal])


def _unit(v):
    n = np.linalg.norm(v)
    if n == 0:
        raise GeometryError("zero-length vector in frame construction")
    return v / n


def _any_perpendicular(d):
    trial = np.array([0.0, 0.0, 1.0])
    if abs(np.dot(trial, d)) > 0.9:
        trial = np.array([0.0, 1.0, 0.0])
    return _unit(trial - np.dot(trial, d) * d)


class CenterCurve:
    """Pipe axis with analytic or sampled parametrization by arc length."""

    def __init__(self, kind, length, point_fn, frame_fn, max_curvature):
        self.kind = kind
        self.length = float(length)
        self._point = point_fn
        self._frame = frame_fn
        self.max_curvature = float(max_curvature)

    # -- constructors ---------------------------------------------------
    @classmethod
    def straight(cls, length, direction=(0.0, 0.0, 1.0), origin=(0.0, 0.0, 0.0),
                 normal=None):
        """Straight axis; kappa = 0 so N, B are a declared constant frame."""
        d = _unit(np.asarray(direction, dtype=float))
        o = np.asarray(origin, dtype=float)
        n = _unit(np.asarray(normal, dtype=float)) if normal is not None \
            else _any_perpendicular(d)
        if abs(np.dot(n, d)) > 1e-9:
            raise GeometryError("supplied normal is not perpendicular to axis")
        b = np.cross(d, n)
        frame = FrenetFrame(d, n, b, 0.0, 0.0, 0.0, 0.0)
        return cls("straight", length, lambda s: o + s * d, lambda s: frame, 0.0)

    @classmethod
    def circular_arc(cls, radius, length):
        """Planar arc of radius a: c(s) = a (cos s/a, sin s/a, 0)."""
        a = float(radius)
        if a <= 0:
            raise GeometryError("arc radius must be positive")

        def point(s):
            th = s / a
            return np.array([a * np.cos(th), a * np.sin(th), 0.0])

        def frame(s):
            th = s / a
            t = np.array([-np.sin(th), np.cos(th), 0.0])
            n = np.array([-np.cos(th), -np.sin(th), 0.0])
            b = np.array([0.0, 0.0, 1.0])
            return FrenetFrame(t, n, b, 1.0 / a, 0.0, 0.0, 0.0)

        return cls("circular-arc", length, point, frame, 1.0 / a)

    @classmethod
    def helix(cls, a, b, length):
        """Helix (a cos th, a sin th, b th), th = s / sqrt(a^2 + b^2)."""
        a, b = float(a), float(b)
        if a <= 0:
            raise GeometryError("helix radius a must be positive")
        c = np.hypot(a, b)
        kappa = a / c**2
        tau = b / c**2

        def point(s):
            th = s / c
            return np.array([a * np.cos(th), a * np.sin(th), b * th])

        def frame(s):
            th = s / c
            t = np.array([-a * np.sin(th), a * np.cos(th), b]) / c
            n = np.array([-np.cos(th), -np.sin(th), 0.0])
            bb = np.array([b * np.sin(th), -b * np.cos(th), a]) / c
            return FrenetFrame(t, n, bb, kappa, 0.0, tau, 0.0)

        return cls("helix", length, point, frame, kappa)

    @classmethod
    def from_samples(cls, s, points):
        """Cubic-spline curve through sampled points, parametrized by s.

        The s column is taken as arc length (tangents are renormalized but
        the parameter itself is not re-fit).  Curvature must stay away from
        zero: sampled curves with straight segments are not supported.
        """
        s = np.asarray(s, dtype=float)
        pts = np.asarray(points, dtype=float)
        if s.ndim != 1 or pts.shape != (s.size, 3):
            raise GeometryError("samples must be (n,) s values and (n, 3) points")
        if s.size < 4:
            raise GeometryError("need at least 4 samples for a cubic spline")
        if np.any(np.diff(s) <= 0):
            raise GeometryError("sample arc lengths must be strictly increasing")
        if np.any(np.linalg.norm(np.diff(pts, axis=0), axis=1) < 1e-14):
            raise GeometryError("degenerate sampled curve: repeated points")

        spline = CubicSpline(s, pts, axis=0)
        d1, d2, d3 = spline.derivative(1), spline.derivative(2), spline.derivative(3)

        def kappa_tau(si):
            c1, c2, c3 = d1(si), d2(si), d3(si)
            cross = np.cross(c1, c2)
            ncross = np.linalg.norm(cross)
            nc1 = np.linalg.norm(c1)
            if ncross < 1e-12 * nc1**2:
                raise GeometryError(
                    f"curvature vanishes near s1 = {si:.6g}; "
                    "use a straight/analytic curve instead"
                )
            kappa = ncross / nc1**3
            tau = float(np.dot(cross, c3)) / ncross**2
            return kappa, tau

        # kappa', tau' from a spline through densely sampled kappa, tau
        dense = np.linspace(s[0], s[-1], max(200, 4 * s.size))
        kt = np.array([kappa_tau(si) for si in dense])
        kappa_spl = CubicSpline(dense, kt[:, 0])
        tau_spl = CubicSpline(dense, kt[:, 1])
        dkappa_spl = kappa_spl.derivative()
        dtau_spl = tau_spl.derivative()

        def frame(si):
            c1, c2 = d1(si), d2(si)
            t = _unit(c1)
            n_raw = c2 - np.dot(c2, t) * t
            if np.linalg.norm(n_raw) < 1e-12 * max(np.linalg.norm(c2), 1.0):
                raise GeometryError(
                    f"curvature vanishes near s1 = {si:.6g}; "
                    "use a straight/analytic curve instead"
                )
            n = _unit(n_raw)
            b = np.cross(t, n)
            return FrenetFrame(
                t, n, b,
                float(kappa_spl(si)), float(dkappa_spl(si)),
                float(tau_spl(si)), float(dtau_spl(si)),
            )

        return cls("sampled", s[-1] - s[0],
                   lambda si: np.asarray(spline(si)), frame,
                   float(kt[:, 0].max()))

    @classmethod
    def from_file(cls, path):
        """Read a sampled curve from delimited text with header s, x, y, z."""
        with open(path) as fh:
            header = fh.readline()
        cols = [c.strip().lower() for c in header.replace(";", ",").split(",")]
        if cols[:4] != ["s", "x", "y", "z"]:
            raise GeometryError(
                f"curve file {path}: expected header 's,x,y,z', got {header!r}"
            )
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        if data.ndim != 2 or data.shape[1] < 4:
            raise GeometryError(f"curve file {path}: need 4 columns")
        return cls.from_samples(data[:, 0], data[:, 1:4])

    # -- evaluation -------------------------------------------------------
    def point(self, s1):
        return self._point(float(s1))

    def frame(self, s1):
        if not (0.0 <= s1 <= self.length + 1e-12):
            raise GeometryError(f"s1 = {s1} outside [0, {self.length}]")
        return self._frame(float(s1))


def frenet_frame(curve: CenterCurve, s1: float) -> FrenetFrame:
    """Frame at s1 with orthonormality enforced to round-off."""
    fr = curve.frame(s1)
    m = fr.basis_matrix()
    err = np.abs(m @ m.T - np.eye(3)).max()
    if err > 1e-9:
        raise GeometryError(f"frame not orthonormal at s1 = {s1} (err {err:.2e})")
    return fr


@dataclass(frozen=True)
class TubeMapParams:
    """Dimensionless radius scale eps plus the axis and wall it applies to."""

    eps: float
    curve: CenterCurve
    wall: "WallState"  # duck-typed: needs radius_at / slope_at / rate_at

    def __post_init__(self):
        if self.eps <= 0:
            raise MapError("eps must be positive")

    def check_invertibility(self):
        """eps * max(kappa) * max(R) must stay below 1 (warn above 0.5)."""
        bound = self.eps * self.curve.max_curvature * float(np.max(self.wall.R))
        if bound >= 1.0:
            worst = float(self.wall.s1[int(np.argmax(self.wall.R))])
            raise MapError(
                f"tube map not invertible: eps*max(kappa R) = {bound:.3g} "
                f">= 1 (widest station s1 = {worst:.6g})"
            )
        if bound > 0.5:
            warnings.warn(
                f"eps*max(kappa R) = {bound:.3g} > 0.5: asymptotic regime "
                "questionable", stacklevel=2,
            )
        return bound


def map_to_physical(params: TubeMapParams, t, s1, s2, s3) -> np.ndarray:
    """World point of reference coordinates (s1, s2, s3) at time t."""
    params.check_invertibility()
    fr = params.curve.frame(s1)
    r = params.wall.radius_at(s1)
    radial = np.cos(s2) * fr.normal + np.sin(s2) * fr.binormal
    return params.curve.point(s1) + params.eps * s3 * r * radial


@dataclass(frozen=True)
class JacobianRows:
    """Inverse-Jacobian rows at one point, in Frenet components (T, N, B).

    ``series`` maps (q, k) to the Frenet components of the eps^k coefficient
    of row q (k = -1 is the 1/eps singular part).
    """

    ds1_dx: np.ndarray
    ds2_dx: np.ndarray
    ds3_dx: np.ndarray
    ds_dt: np.ndarray
    series: dict


def inverse_jacobian_rows(params: TubeMapParams, t, s1, s2, s3,
                          series_order: int = 4) -> JacobianRows:
    """Rows of the inverse Jacobian of the tube map, plus their eps series.

    The s2 row carries a 1/s3 factor and is undefined on the axis.
    """
    if s3 <= 0:
        raise SingularAxisError("ds2/dx is singular at s3 = 0")
    eps = params.eps
    fr = params.curve.frame(s1)
    r = params.wall.radius_at(s1)
    dr = params.wall.slope_at(s1)
    rdot = params.wall.rate_at(s1)
    kappa, tau = fr.curvature, fr.torsion

    cos, sin = np.cos(s2), np.sin(s2)
    denom = 1.0 - eps * kappa * s3 * r * cos
    if denom <= 0:
        raise MapError(f"tube map not invertible at s1 = {s1} (denominator {denom:.3g})")

    ds1 = np.array([1.0 / denom, 0.0, 0.0])
    ds2 = np.array([-tau / denom, -sin / (eps * s3 * r), cos / (eps * s3 * r)])
    ds3 = np.array([-s3 * dr / (r * denom), cos / (eps * r), sin / (eps * r)])
    ds_dt = np.array([0.0, 0.0, -s3 * rdot / r])

    # geometric series of 1/denom: coefficient of eps^k is (kappa s3 R cos)^k
    b = kappa * s3 * r * cos
    series = {
        (1, -1): np.zeros(3),
        (2, -1): np.array([0.0, -sin / (r * s3), cos / (r * s3)]),
        (3, -1): np.array([0.0, cos / r, sin / r]),
    }
    for k in range(series_order + 1):
        series[(1, k)] = np.array([b**k, 0.0, 0.0])
        series[(2, k)] = np.array([-tau * b**k, 0.0, 0.0])
        series[(3, k)] = np.array([-(s3 * dr / r) * b**k, 0.0, 0.0])
    return JacobianRows(ds1, ds2, ds3, ds_dt, series)


def forward_jacobian(params: TubeMapParams, t, s1, s2, s3):
    """Columns dx/ds1, dx/ds2, dx/ds3 and dx/dt, in Frenet components."""
    eps = params.eps
    fr = params.curve.frame(s1)
    r = params.wall.radius_at(s1)
    dr = params.wall.slope_at(s1)
    rdot = params.wall.rate_at(s1)
    kappa, tau = fr.curvature, fr.torsion
    cos, sin = np.cos(s2), np.sin(s2)

    dx_ds1 = np.array([
        1.0 - eps * s3 * r * kappa * cos,
        eps * s3 * (dr * cos - r * tau * sin),
        eps * s3 * (dr * sin + r * tau * cos),
    ])
    dx_ds2 = np.array([0.0, -eps * s3 * r * sin, eps * s3 * r * cos])
    dx_ds3 = np.array([0.0, eps * r * cos, eps * r * sin])
    dx_dt = np.array([0.0, eps * s3 * rdot * cos, eps * s3 * rdot * sin])
    return np.column_stack([dx_ds1, dx_ds2, dx_ds3]), dx_dt


def evaluate_series_row(rows: JacobianRows, q: int, eps: float,
                        order: int) -> np.ndarray:
    """Assemble row q from its eps series truncated at the given order."""
    total = rows.series[(q, -1)] / eps
    for k in range(order + 1):
        total = total + rows.series[(q, k)] * eps**k
    return total
