"""Regions with smooth boundary curves, curvature machinery, osculating
caps, nearest boundary points, segment admissibility checks and spectral
coefficients of indicator signals.

A region is the rotated sub-graph ``{x : theta(R0^-1 x) < g(phi(R0^-1 x))}``
of a trigonometric polynomial ``g``; that covers spherical caps and the
wiggly demo region used throughout the command-line studies.  Boundary
curves are reparameterized to unit speed, with derivatives up to third
order computed analytically from ``g``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import PchipInterpolator
from scipy.optimize import minimize_scalar

from scipy.special import roots_legendre

from .errors import PreconditionError, ValidationError
from .geometry import Cap, check_rotation, euler_to_rotation, geodesic_distance, rot_y
from .harmonics import HarmonicCoeffs, make_grid, norm_assoc_legendre_all, sht_forward

_GAUSS8 = roots_legendre(8)


class GraphRegion:
    """Region ``theta < g(phi)`` in a rotated reference frame.

    ``g`` is the trigonometric polynomial ``a0 + sum a_m cos(m phi)
    + b_m sin(m phi)``; it must stay strictly inside ``(0, pi)`` so the
    boundary avoids the frame's poles.
    """

    def __init__(self, a0, a=(), b=(), rotation=None):
        self.a0 = float(a0)
        self.a = np.asarray(a, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.rotation = np.eye(3) if rotation is None else check_rotation(rotation)
        probe = self.g(np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False))
        if probe.min() <= 0.0 or probe.max() >= np.pi:
            raise ValidationError("boundary graph must stay strictly inside (0, pi)")

    def _series(self, phi, power, cos_sign, sin_sign, swap):
        """Common form of the derivatives of the trigonometric series."""
        phi = np.asarray(phi, dtype=float)
        out = np.zeros_like(phi)
        for m, c in enumerate(self.a, start=1):
            if c != 0.0:
                f = np.sin(m * phi) if swap else np.cos(m * phi)
                out = out + cos_sign * c * m ** power * f
        for m, c in enumerate(self.b, start=1):
            if c != 0.0:
                f = np.cos(m * phi) if swap else np.sin(m * phi)
                out = out + sin_sign * c * m ** power * f
        return out

    def g(self, phi):
        return self.a0 + self._series(phi, 0, 1.0, 1.0, swap=False)

    def g1(self, phi):
        return self._series(phi, 1, -1.0, 1.0, swap=True)

    def g2(self, phi):
        return self._series(phi, 2, -1.0, -1.0, swap=False)

    def g3(self, phi):
        return self._series(phi, 3, 1.0, -1.0, swap=True)

    def indicator(self, points):
        """1 inside, 0 on the boundary and outside."""
        pts = np.asarray(points, dtype=float)
        local = pts @ self.rotation            # row form of R0^{-1} x
        theta = np.arccos(np.clip(local[..., 2], -1.0, 1.0))
        phi = np.arctan2(local[..., 1], local[..., 0])
        return (theta < self.g(phi)).astype(float)

    def to_dict(self):
        alpha, beta, gamma = _rotation_euler(self.rotation)
        return {"g_coeffs": {"a0": self.a0, "a": list(map(float, self.a)),
                             "b": list(map(float, self.b))},
                "frame_euler": [alpha, beta, gamma]}

    @classmethod
    def from_dict(cls, data):
        gc = data["g_coeffs"]
        rot = euler_to_rotation(*data["frame_euler"])
        return cls(gc["a0"], gc.get("a", ()), gc.get("b", ()), rotation=rot)

    def save_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _rotation_euler(rotation):
    from .geometry import euler_decompose

    return euler_decompose(rotation)


def region_indicator(region: GraphRegion, x):
    """Free-function view of :meth:`GraphRegion.indicator`."""
    return region.indicator(x)


def demo_region() -> GraphRegion:
    """Wiggly test region: ``g(phi) = (7/500)(20 pi + 5 cos 2phi
    + 5 sin 5phi - 2 sin 7phi)`` tilted by a fifth of a half-turn."""
    s = 7.0 / 500.0
    return GraphRegion(a0=s * 20.0 * np.pi,
                       a=[0.0, 5.0 * s],
                       b=[0.0, 0.0, 0.0, 0.0, 5.0 * s, 0.0, -2.0 * s],
                       rotation=rot_y(np.pi / 5.0))


def cap_region(cap: Cap) -> GraphRegion:
    """A spherical cap expressed as a constant graph in a rotated frame."""
    from .geometry import point_angles

    theta, phi = point_angles(cap.center)
    return GraphRegion(a0=cap.radius, rotation=euler_to_rotation(phi, theta, 0.0))


def _sphere_partials(theta, phi):
    """Partial derivatives of the latitude/longitude chart up to order 3."""
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    zeros = np.zeros_like(st)
    x = np.stack([st * cp, st * sp, ct], axis=-1)
    x_t = np.stack([ct * cp, ct * sp, -st], axis=-1)
    x_p = np.stack([-st * sp, st * cp, zeros], axis=-1)
    x_tp = np.stack([-ct * sp, ct * cp, zeros], axis=-1)
    x_pp = np.stack([-st * cp, -st * sp, zeros], axis=-1)
    x_tpp = np.stack([-ct * cp, -ct * sp, zeros], axis=-1)
    x_ppp = np.stack([st * sp, -st * cp, zeros], axis=-1)
    return x, x_t, x_p, x_tp, x_pp, x_tpp, x_ppp


class BoundaryCurve:
    """Closed unit-speed boundary of a :class:`GraphRegion`.

    Positions and derivatives up to third order come from analytic
    differentiation of the graph; only the inversion of the cumulative
    arc length is numerical (dense table plus Newton refinement).
    The curve is traversed with increasing frame longitude, which puts the
    region on the counterclockwise-normal side.
    """

    def __init__(self, region: GraphRegion, samples=4096, _nodes=8192):
        if samples < 512:
            raise PreconditionError("need at least 512 table samples")
        self.region = region
        phis = np.linspace(0.0, 2.0 * np.pi, _nodes + 1)
        speeds = self._speed(phis)
        # cumulative arc length on panels; fixed Gauss nodes per panel keep
        # every partial at near machine accuracy
        gx, gw = _GAUSS8
        mid = 0.5 * (phis[1:] + phis[:-1])
        half = 0.5 * np.diff(phis)
        nodes = mid[:, None] + half[:, None] * gx[None, :]
        panel = np.sum(self._speed(nodes) * gw[None, :], axis=1) * half
        self._phi_nodes = phis
        self._t_nodes = np.concatenate([[0.0], np.cumsum(panel)])
        self.length = float(self._t_nodes[-1])
        self._phi_of_t = PchipInterpolator(self._t_nodes, self._phi_nodes)

        self.table_ts = np.linspace(0.0, self.length, samples, endpoint=False)
        self.table_points = self.point(self.table_ts)
        self._validate()

    # -- scalar geometry of the graph ------------------------------------
    def _speed(self, phi):
        g = self.region.g(phi)
        g1 = self.region.g1(phi)
        return np.sqrt(g1 * g1 + np.sin(g) ** 2)

    def phi_at(self, t):
        """Frame longitude of the arc-length position ``t`` (cyclic)."""
        t = np.mod(np.atleast_1d(np.asarray(t, dtype=float)), self.length)
        phi = np.asarray(self._phi_of_t(t), dtype=float)
        # two Newton corrections against panel-exact arc length
        for _ in range(2):
            idx = np.clip(np.searchsorted(self._phi_nodes, phi, side="right") - 1,
                          0, len(self._phi_nodes) - 2)
            gx, gw = _GAUSS8
            lo = self._phi_nodes[idx]
            mid = 0.5 * (lo + phi)
            half = 0.5 * (phi - lo)
            nodes = mid[..., None] + half[..., None] * gx
            t_here = self._t_nodes[idx] + np.sum(self._speed(nodes) * gw, axis=-1) * half
            phi = phi - (t_here - t) / self._speed(phi)
        return phi

    def _frames(self, t):
        """Unit-speed derivatives ``v, v', v'', v'''`` at ``t`` (global frame)."""
        phi = self.phi_at(t)
        reg = self.region
        g, g1, g2, g3 = reg.g(phi), reg.g1(phi), reg.g2(phi), reg.g3(phi)
        x, x_t, x_p, x_tp, x_pp, x_tpp, x_ppp = _sphere_partials(g, phi)
        g1e, g2e, g3e = (np.expand_dims(a, -1) for a in (g1, g2, g3))
        V = x
        V1 = g1e * x_t + x_p
        V2 = g2e * x_t + g1e ** 2 * (-x) + 2.0 * g1e * x_tp + x_pp
        V3 = (g3e * x_t + 3.0 * g2e * g1e * (-x) + g1e ** 3 * (-x_t)
              + 3.0 * g2e * x_tp + 3.0 * g1e ** 2 * (-x_p)
              + 3.0 * g1e * x_tpp + x_ppp)
        sig = np.sqrt(np.sum(V1 * V1, axis=-1))
        sig1 = np.sum(V1 * V2, axis=-1) / sig
        sig2 = (np.sum(V2 * V2, axis=-1) + np.sum(V1 * V3, axis=-1) - sig1 ** 2) / sig
        s = np.expand_dims(sig, -1)
        s1 = np.expand_dims(sig1, -1)
        s2 = np.expand_dims(sig2, -1)
        v = V
        v1 = V1 / s
        v2 = (V2 * s - V1 * s1) / s ** 3
        v3 = ((V3 * s - V1 * s2) * s - 3.0 * s1 * (V2 * s - V1 * s1)) / s ** 5
        R = self.region.rotation
        return tuple(a @ R.T for a in (v, v1, v2, v3))

    def point(self, t):
        out = self._frames(np.atleast_1d(t))[0]
        return out[0] if np.ndim(t) == 0 else out

    def deriv1(self, t):
        out = self._frames(np.atleast_1d(t))[1]
        return out[0] if np.ndim(t) == 0 else out

    def deriv2(self, t):
        out = self._frames(np.atleast_1d(t))[2]
        return out[0] if np.ndim(t) == 0 else out

    def deriv3(self, t):
        out = self._frames(np.atleast_1d(t))[3]
        return out[0] if np.ndim(t) == 0 else out

    def curvature(self, t):
        return np.linalg.norm(self.deriv2(t), axis=-1)

    def geodesic_curvature(self, t):
        """Signed curvature ``<v'', v x v'>``; positive when the curve
        bends toward the region."""
        v, v1, v2, _ = self._frames(np.atleast_1d(t))
        out = np.sum(v2 * np.cross(v, v1), axis=-1)
        return out[0] if np.ndim(t) == 0 else out

    def _validate(self):
        ts = self.table_ts[:: max(1, len(self.table_ts) // 256)]
        v, v1, v2, _ = self._frames(ts)
        if np.max(np.abs(np.linalg.norm(v, axis=-1) - 1.0)) > 1e-8:
            raise ValidationError("boundary points drift off the sphere")
        if np.max(np.abs(np.linalg.norm(v1, axis=-1) - 1.0)) > 1e-8:
            raise ValidationError("parameterization is not unit speed")
        if np.min(np.linalg.norm(v2, axis=-1)) < 1.0 - 1e-6:
            raise ValidationError("curvature dropped below 1")
        probe = v + 1e-4 * np.cross(v, v1)
        probe /= np.linalg.norm(probe, axis=-1, keepdims=True)
        if not np.all(self.region.indicator(probe) == 1.0):
            raise ValidationError("boundary orientation is not positive")

    def export_csv(self, path):
        """Rows ``t,x,y,z,kx,ky,kz`` (position and second derivative)."""
        v2 = self.deriv2(self.table_ts)
        with open(path, "w") as fh:
            fh.write("t,x,y,z,kx,ky,kz\n")
            for t, p, k in zip(self.table_ts, self.table_points, v2):
                fh.write(f"{t:.17g},{p[0]:.17g},{p[1]:.17g},{p[2]:.17g},"
                         f"{k[0]:.17g},{k[1]:.17g},{k[2]:.17g}\n")


def boundary_curve(region: GraphRegion, samples=4096) -> BoundaryCurve:
    return BoundaryCurve(region, samples=samples)


@dataclass(frozen=True)
class SegmentReport:
    """Admissibility data of a boundary segment ``[a, b]`` with margin
    ``delta``."""

    a: float
    b: float
    delta: float
    phi_star: float              # inf of arcsin(1 / curvature)
    d_delta: float               # protective radius of the trimmed segment
    eq1_ok: bool                 # chord/tangent oscillation bounds hold
    sup_d3: float                # sup norm of the third derivative
    chord_margin: float
    tangent_margin: float


def segment_validate(curve: BoundaryCurve, a, b, delta, grid=512) -> SegmentReport:
    """Checks the segment smallness conditions and computes the derived
    quantities entering the asymptotic statements.

    ``a = 0, b = length`` treats the whole closed curve as the segment (no
    complementary part).  A failed oscillation bound is reported, not
    raised.
    """
    if not 0.0 < delta <= 1.0:
        raise PreconditionError("delta must lie in (0, 1]")
    full = abs(b - a - curve.length) < 1e-12
    if not full and not (0.0 <= a < b <= curve.length):
        raise PreconditionError("need 0 <= a < b <= curve length")
    if a + delta >= b - delta:
        raise PreconditionError("segment too short for the margin delta")

    ts = np.linspace(a, b, grid + 1)
    v, v1, v2, _ = curve._frames(ts)
    curv = np.linalg.norm(v2, axis=-1)
    phi_star = float(np.arcsin(1.0 / np.max(curv)))

    chord = np.linalg.norm(v[:, None, :] - v[None, :, :], axis=-1)
    tang = np.linalg.norm(v1[:, None, :] - v1[None, :, :], axis=-1)
    chord_bound = (1.0 - np.cos(phi_star)) / 2.0
    tang_bound = 0.25 - (1.0 + np.cos(phi_star)) ** 2 / 16.0
    chord_margin = float(chord_bound - np.max(chord))
    tang_margin = float(tang_bound - np.max(tang))
    eq1_ok = bool(chord_margin >= 0.0 and tang_margin >= 0.0)

    d_delta = delta / 5.0 * np.sin(phi_star / 2.0)
    if not full:
        inner = np.linspace(a + delta, b - delta, grid + 1)
        comp_len = curve.length - (b - a)
        ncomp = max(grid + 1, 1024)
        comp = np.mod(np.linspace(b, b + comp_len, ncomp + 1), curve.length)
        pi_ = curve.point(inner)
        pc = curve.point(comp)
        gap = np.min(geodesic_distance(pi_[:, None, :], pc[None, :, :]))
        d_delta = min(d_delta, float(gap))

    # third derivative: Richardson-extrapolated central differences of the
    # second derivative, cross-checking the analytic chain rule
    h = curve.length * 1e-4
    sup_d3 = 0.0
    sample = np.linspace(a, b, 65)
    for hh in (h,):
        d_h = (curve.deriv2(sample + hh) - curve.deriv2(sample - hh)) / (2.0 * hh)
        d_h2 = (curve.deriv2(sample + hh / 2) - curve.deriv2(sample - hh / 2)) / hh
        rich = (4.0 * d_h2 - d_h) / 3.0
        sup_d3 = max(sup_d3, float(np.max(np.linalg.norm(rich, axis=-1))))
    return SegmentReport(a=float(a), b=float(b), delta=float(delta),
                         phi_star=phi_star, d_delta=float(d_delta),
                         eq1_ok=eq1_ok, sup_d3=sup_d3,
                         chord_margin=chord_margin, tangent_margin=tang_margin)


@dataclass(frozen=True)
class NearestPoint:
    t: float
    point: np.ndarray
    distance: float
    inside: bool
    ambiguous: bool


def nearest_boundary_point(curve: BoundaryCurve, x) -> NearestPoint:
    """Global minimizer of ``d(v(t), x)`` over the curve (dense scan plus
    bounded refinement to ~1e-10 in the parameter)."""
    x = np.asarray(x, dtype=float)
    dists = geodesic_distance(curve.table_points, x[None, :])
    i = int(np.argmin(dists))
    n = len(curve.table_ts)
    step = curve.length / n

    def objective(t):
        return float(geodesic_distance(curve.point(t), x))

    lo = curve.table_ts[i] - step
    hi = curve.table_ts[i] + step
    res = minimize_scalar(objective, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    t_best = float(np.mod(res.x, curve.length))
    d_best = float(res.fun)

    # flag well-separated near-ties (possible only outside the guaranteed
    # uniqueness neighborhood)
    near = np.nonzero(dists <= dists[i] + 1e-9 + 2.0 * step)[0]
    gaps = np.diff(np.sort(near))
    separated = np.any(gaps > 8) if len(near) > 1 else False
    ambiguous = False
    if separated:
        rival = near[np.argmax(np.abs(curve.table_ts[near] - curve.table_ts[i]))]
        res2 = minimize_scalar(objective,
                               bounds=(curve.table_ts[rival] - step,
                                       curve.table_ts[rival] + step),
                               method="bounded", options={"xatol": 1e-12})
        if abs(float(res2.fun) - d_best) < 1e-9 and \
                abs(np.mod(res2.x - t_best + curve.length / 2, curve.length)
                    - curve.length / 2) > 4 * step:
            ambiguous = True

    inside = bool(curve.region.indicator(x[None, :])[0])
    return NearestPoint(t=t_best, point=curve.point(t_best), distance=d_best,
                        inside=inside, ambiguous=ambiguous)


def osculating_cap(curve: BoundaryCurve, p) -> Cap:
    """The unique cap whose boundary matches position, tangent and second
    derivative at ``v(p)``, oriented so that its inside agrees locally with
    the region."""
    v, v1, v2, _ = curve._frames(np.atleast_1d(float(p)))
    v, v1, v2 = v[0], v1[0], v2[0]
    if np.linalg.norm(v2) < 1.0 - 1e-6:
        raise ValidationError("curvature below 1; not a valid spherical curve")
    normal = np.cross(v, v1)
    k_g = float(np.dot(v2, normal))
    phi0 = math.atan2(1.0, k_g)          # cot(phi0) = k_g, sin(phi0) > 0
    center = math.cos(phi0) * v + math.sin(phi0) * normal
    center /= np.linalg.norm(center)
    return Cap(center=center, radius=phi0)


def cap_tangency_residuals(cap: Cap, v, v1, v2):
    """Mismatch of (position, tangent, second derivative) between the
    cap's unit-speed boundary and the supplied curve data at one point."""
    v = np.asarray(v, dtype=float)
    z = cap.center
    s = math.sin(cap.radius)
    e1 = v - np.dot(v, z) * z
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(z, e1)
    if np.dot(e2, v1) < 0.0:
        e2 = -e2
    u0 = math.cos(cap.radius) * z + s * e1
    u1 = e2
    u2 = -e1 / s
    return (float(np.linalg.norm(u0 - v)),
            float(np.linalg.norm(u1 - v1)),
            float(np.linalg.norm(u2 - v2)))


def _cap_column(theta_c, dphi, radius):
    """Latitude interval cut out of a meridian by a cap: the set of
    ``theta`` with ``(theta, phi)`` inside the cap whose center sits at
    latitude ``theta_c``, ``dphi`` away in longitude."""
    a = math.cos(theta_c)
    b = math.sin(theta_c) * math.cos(dphi)
    rho = math.hypot(a, b)
    cr = math.cos(radius)
    if rho < cr:
        return None
    psi = math.atan2(b, a)
    w = math.acos(max(-1.0, min(1.0, cr / rho)))
    return max(0.0, psi - w), min(math.pi, psi + w)


def _column_symdiff_measure(g_val, cap_iv, win_iv):
    """Integral of ``sin(theta)`` over ``((0, g) sym-diff cap-interval)``
    intersected with a window interval."""
    lo_w, hi_w = win_iv
    pts = [lo_w, hi_w]
    if lo_w < g_val < hi_w:
        pts.append(g_val)
    if cap_iv is not None:
        for e in cap_iv:
            if lo_w < e < hi_w:
                pts.append(e)
    pts.sort()
    total = 0.0
    for s0, s1 in zip(pts[:-1], pts[1:]):
        mid = 0.5 * (s0 + s1)
        in_a = mid < g_val
        in_c = cap_iv is not None and cap_iv[0] < mid < cap_iv[1]
        if in_a != in_c:
            # cos s0 - cos s1, stable for narrow strips
            total += 2.0 * math.sin(mid) * math.sin(0.5 * (s1 - s0))
    return total


def cap_area_difference(region: GraphRegion, curve: BoundaryCurve, p, r,
                        x=None, d_delta=None, nphi=4097):
    """Area of the symmetric difference between the region and the
    osculating cap at ``v(p)``, restricted to the small cap ``C(x, r)``.

    ``x`` defaults to ``v(p)`` itself.  Column-wise exact latitude
    integration leaves only a 1-d longitude quadrature, which is refined
    until the value is trusted to 1% relative or 1e-12 absolute.
    """
    if d_delta is not None and not r < d_delta / 2.0:
        raise PreconditionError("radius must stay below half the protective distance")
    if r <= 0.0:
        raise PreconditionError("radius must be positive")
    cap = osculating_cap(curve, p)
    if x is None:
        x = curve.point(p)
    x = np.asarray(x, dtype=float)
    rot = region.rotation
    xl = rot.T @ x
    zl = rot.T @ cap.center
    theta_x = math.acos(max(-1.0, min(1.0, xl[2])))
    phi_x = math.atan2(xl[1], xl[0])
    theta_z = math.acos(max(-1.0, min(1.0, zl[2])))
    phi_z = math.atan2(zl[1], zl[0])
    if not r < theta_x < math.pi - r:
        raise PreconditionError("window cap touches a coordinate pole")
    w = math.asin(min(1.0, math.sin(r) / math.sin(theta_x)))

    def value(n):
        phis = np.linspace(phi_x - w, phi_x + w, n)
        gs = region.g(phis)
        vals = np.empty(n)
        for i, (ph, gv) in enumerate(zip(phis, gs)):
            win = _cap_column(theta_x, ph - phi_x, r)
            if win is None:
                vals[i] = 0.0
                continue
            cap_iv = _cap_column(theta_z, ph - phi_z, cap.radius)
            vals[i] = _column_symdiff_measure(float(gv), cap_iv, win)
        return float(simpson(vals, x=phis))

    n = int(nphi) | 1
    coarse = value((n - 1) // 2 + 1)
    fine = value(n)
    for _ in range(2):
        if abs(fine - coarse) <= max(0.01 * abs(fine), 1e-12):
            break
        n = 2 * (n - 1) + 1
        coarse, fine = fine, value(n)
    return fine


def cap_harmonic_coeffs(cap: Cap, lmax) -> HarmonicCoeffs:
    """Exact expansion coefficients of a cap indicator.

    About the north pole the only nonzero orders are ``k = 0`` with
    ``c[0,0] = sqrt(pi)(1 - cos phi0)`` and
    ``c[n,0] = sqrt(pi/(2n+1)) (P_{n-1}(c) - P_{n+1}(c))``; a general
    center follows from the reproducing (addition) identity for zonal
    functions.  Cross-checked against grid quadrature in the test suite.
    """
    c = math.cos(cap.radius)
    bar = norm_assoc_legendre_all(lmax + 1, 0, np.array([c]))[:, 0]
    scale = np.sqrt((2.0 * np.arange(lmax + 2) + 1.0) / (4.0 * math.pi))
    pn = bar / scale                      # P_n(c) for n = 0 .. lmax+1
    zonal = np.zeros(lmax + 1)
    zonal[0] = math.sqrt(math.pi) * (1.0 - c)
    ns = np.arange(1, lmax + 1)
    zonal[1:] = np.sqrt(math.pi / (2.0 * ns + 1.0)) * (pn[ns - 1] - pn[ns + 1])

    out = HarmonicCoeffs(lmax)
    z = cap.center
    if np.allclose(z, [0.0, 0.0, 1.0], atol=1e-15):
        out.values[:, lmax] = zonal
        return out
    theta_z = math.acos(max(-1.0, min(1.0, z[2])))
    phi_z = math.atan2(z[1], z[0])
    xz = np.array([math.cos(theta_z)])
    for k in range(0, lmax + 1):
        barp = norm_assoc_legendre_all(lmax, k, xz)[:, 0]
        ns = np.arange(lmax + 1)
        lam = np.sqrt(4.0 * math.pi / (2.0 * ns + 1.0)) * zonal
        ynk = barp * np.exp(1j * k * phi_z)
        out.values[:, lmax + k] = lam * np.conj(ynk)
        if k > 0:
            # conj(Y_n^{-k}) = (-1)^k Y_n^k
            out.values[:, lmax - k] = lam * (-1.0) ** k * ynk
    return out


def region_harmonic_coeffs(region: GraphRegion, lmax, grid_degree):
    """Quadrature approximation of the indicator's coefficients plus its
    tail-energy ratio (the indicator is not band-limited, so the tail
    ratio estimates the truncation noise floor)."""
    grid = make_grid(grid_degree)
    samples = grid.sample_points(region.indicator)
    coeffs = sht_forward(samples, grid, lmax)
    return coeffs, coeffs.tail_energy_ratio()
