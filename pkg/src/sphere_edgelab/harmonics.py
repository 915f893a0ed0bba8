"""Legendre functions, spherical harmonics, quadrature grids and the
forward/inverse spherical harmonic transform.

The orthonormal basis is

    Y_n^k(theta, phi) = (-1)^k sqrt((2n+1)/(4pi) (n-k)!/(n+k)!)
                        P_n^k(cos theta) exp(i k phi)

with ``P_n^k`` the associated Legendre function (no Condon-Shortley phase
of its own; the ``(-1)^k`` sits in front).  All internal evaluation goes
through a fully normalized degree recurrence so that degrees of several
hundred stay finite; the raw ``P_n^k`` is only exposed for small degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_legendre

from .errors import DomainError, PreconditionError, ValidationError


def legendre(n, x):
    """Legendre polynomial ``P_n(x)`` by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + 1e-14):
        raise DomainError("Legendre argument must lie in [-1, 1]")
    if n < 0:
        raise DomainError("degree must be nonnegative")
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev
    p = x.copy()
    for m in range(1, n):
        p, p_prev = ((2 * m + 1) * x * p - m * p_prev) / (m + 1), p
    return p


def norm_assoc_legendre_all(lmax, k, x):
    """Normalized associated Legendre values for one order and all degrees.

    Returns an array of shape ``(lmax + 1,) + x.shape`` whose row ``n``
    holds ``(-1)^k sqrt((2n+1)/(4pi) (n-k)!/(n+k)!) P_n^k(x)`` (zero for
    ``n < k``).  Requires ``k >= 0``.  This is the ``phi``-independent part
    of ``Y_n^k``; it stays bounded by ``sqrt((2n+1)/(4pi))`` for any degree.
    """
    if k < 0:
        raise DomainError("order must be nonnegative here; use symmetry for k < 0")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + 1e-14):
        raise DomainError("argument must lie in [-1, 1]")
    x = np.clip(x, -1.0, 1.0)
    out = np.zeros((lmax + 1,) + x.shape)
    if k > lmax:
        return out
    # seed P~_k^k, building the (-1)^k phase into the cross-order step
    pkk = np.full_like(x, 1.0 / math.sqrt(4.0 * math.pi))
    sx = np.sqrt(np.maximum(0.0, 1.0 - x * x))
    for m in range(1, k + 1):
        pkk = -math.sqrt((2 * m + 1) / (2.0 * m)) * sx * pkk
    out[k] = pkk
    if k + 1 <= lmax:
        out[k + 1] = math.sqrt(2 * k + 3) * x * pkk
    for n in range(k + 2, lmax + 1):
        a = math.sqrt((4.0 * n * n - 1.0) / (n * n - k * k))
        b = math.sqrt(((n - 1.0) ** 2 - k * k) / (4.0 * (n - 1.0) ** 2 - 1.0))
        out[n] = a * (x * out[n - 1] - b * out[n - 2])
    return out


def _norm_factor(n, k):
    """sqrt((2n+1)/(4pi) (n-k)!/(n+k)!) using exact integer factorials."""
    ratio = math.factorial(n - k) / math.factorial(n + k)
    return math.sqrt((2 * n + 1) / (4.0 * math.pi) * ratio)


def assoc_legendre(n, k, x):
    """Raw associated Legendre ``P_n^k(x)`` (derivative definition).

    Negative orders follow ``P_n^k = (-1)^k (n+k)!/(n-k)! P_n^{-k}`` for
    ``k < 0``; orders ``|k| > n`` give 0.  Factorials limit this raw form
    to moderate degrees (``n <= 150`` or so); use the normalized recurrence
    beyond that.
    """
    if n < 0:
        raise DomainError("degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + 1e-14):
        raise DomainError("argument must lie in [-1, 1]")
    if abs(k) > n:
        return np.zeros_like(x)
    if k < 0:
        m = -k
        refl = (-1) ** m * math.factorial(n - m) / math.factorial(n + m)
        return refl * assoc_legendre(n, m, x)
    bar = norm_assoc_legendre_all(n, k, x)[n]
    return (-1) ** k * bar / _norm_factor(n, k)


def sph_harm(n, k, theta, phi):
    """Orthonormal spherical harmonic ``Y_n^k`` at ``(theta, phi)``."""
    if abs(k) > n:
        raise DomainError("order must satisfy |k| <= n")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    bar = norm_assoc_legendre_all(n, abs(k), np.cos(theta))[n]
    if k < 0:
        bar = (-1.0) ** k * bar
    return bar * np.exp(1j * k * phi)


class HarmonicCoeffs:
    """Triangular array of expansion coefficients ``c[n, k]``,
    ``0 <= n <= lmax``, ``|k| <= n``.

    Stored densely as a complex matrix indexed ``[n, k + lmax]``; entries
    outside the triangle stay zero.
    """

    def __init__(self, lmax, values=None):
        if lmax < 0:
            raise ValidationError("lmax must be nonnegative")
        self.lmax = int(lmax)
        if values is None:
            self.values = np.zeros((lmax + 1, 2 * lmax + 1), dtype=complex)
        else:
            values = np.asarray(values, dtype=complex)
            if values.shape != (lmax + 1, 2 * lmax + 1):
                raise ValidationError("coefficient array has the wrong shape")
            self.values = values.copy()

    def get(self, n, k):
        if abs(k) > n or n > self.lmax:
            return 0.0 + 0.0j
        return self.values[n, k + self.lmax]

    def set(self, n, k, value):
        if abs(k) > n or n > self.lmax:
            raise ValidationError(f"(n, k) = ({n}, {k}) outside the triangle")
        self.values[n, k + self.lmax] = value

    def degree_slice(self, n):
        """View of the coefficients of degree ``n`` (length ``2n + 1``)."""
        return self.values[n, self.lmax - n:self.lmax + n + 1]

    def copy(self):
        return HarmonicCoeffs(self.lmax, self.values)

    def __sub__(self, other):
        if other.lmax != self.lmax:
            raise PreconditionError("degree bounds differ")
        out = self.copy()
        out.values -= other.values
        return out

    def norm(self):
        return float(np.linalg.norm(self.values))

    def real_symmetry_error(self):
        """Deviation from ``c[n, -k] = (-1)^k conj(c[n, k])`` (zero for
        expansions of real-valued signals)."""
        err = 0.0
        for n in range(self.lmax + 1):
            row = self.degree_slice(n)
            k = np.arange(-n, n + 1)
            err = max(err, float(np.max(np.abs(row[::-1] - (-1.0) ** k * np.conj(row)))))
        return err

    def tail_energy_ratio(self, frac=0.25):
        """Energy share of the top ``frac`` of degrees; a proxy for how
        band-limited the expansion really is."""
        total = float(np.sum(np.abs(self.values) ** 2))
        if total == 0.0:
            return 0.0
        n0 = int(np.ceil((1.0 - frac) * self.lmax))
        tail = float(np.sum(np.abs(self.values[n0:]) ** 2))
        return tail / total

    def save_csv(self, path):
        """Write rows ``n,k,re,im`` sorted by ``(n, k)``."""
        with open(path, "w") as fh:
            fh.write("n,k,re,im\n")
            for n in range(self.lmax + 1):
                for k in range(-n, n + 1):
                    c = self.get(n, k)
                    fh.write(f"{n},{k},{c.real:.17g},{c.imag:.17g}\n")

    @classmethod
    def load_csv(cls, path):
        rows = np.atleast_2d(np.loadtxt(path, delimiter=",", skiprows=1))
        if rows.size == 0:
            raise ValidationError("empty coefficient file")
        lmax = int(np.max(rows[:, 0]))
        out = cls(lmax)
        for n, k, re, im in rows:
            out.set(int(n), int(k), re + 1j * im)
        return out


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor grid: Gauss-Legendre nodes in ``cos(theta)`` crossed with
    equispaced longitudes, integrating spherical polynomials of degree up
    to ``l`` exactly."""

    l: int
    thetas: np.ndarray
    weights: np.ndarray
    phis: np.ndarray
    xs: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "xs", np.cos(self.thetas))

    @property
    def shape(self):
        return len(self.thetas), len(self.phis)

    def sample(self, fn):
        """Evaluate ``fn(theta, phi)`` on the full grid, shape ``(n_theta, n_phi)``."""
        tt, pp = np.meshgrid(self.thetas, self.phis, indexing="ij")
        return np.asarray(fn(tt, pp))

    def sample_points(self, fn):
        """Evaluate ``fn(points)`` on the grid, points as unit vectors."""
        tt, pp = np.meshgrid(self.thetas, self.phis, indexing="ij")
        st = np.sin(tt)
        pts = np.stack([st * np.cos(pp), st * np.sin(pp), np.cos(tt)], axis=-1)
        return np.asarray(fn(pts.reshape(-1, 3))).reshape(tt.shape)

    def integrate(self, samples):
        """Surface integral of gridded samples."""
        samples = np.asarray(samples)
        if samples.shape != self.shape:
            raise PreconditionError("sample array does not match the grid")
        ring = samples.sum(axis=1) * (2.0 * np.pi / len(self.phis))
        return np.dot(self.weights, ring)


def make_grid(l):
    """Quadrature grid exact for spherical polynomials of degree <= ``l``."""
    if l < 0:
        raise PreconditionError("exactness degree must be nonnegative")
    m = max(1, (l + 2) // 2)        # Gauss-Legendre: m nodes integrate degree 2m-1
    xs, ws = roots_legendre(m)
    thetas = np.arccos(xs[::-1])    # increasing theta
    weights = ws[::-1].copy()
    nphi = l + 1
    phis = 2.0 * np.pi * np.arange(nphi) / nphi
    return QuadratureGrid(l=l, thetas=thetas, weights=weights, phis=phis)


def sht_forward(samples, grid: QuadratureGrid, lmax):
    """Coefficients ``<f, Y_n^k>`` from samples on a quadrature grid.

    Exact (up to rounding) when ``f`` is band-limited to ``lmax`` and the
    grid integrates degree ``2 * lmax``; for other signals it returns the
    quadrature approximation of the projection integrals.
    """
    samples = np.asarray(samples, dtype=complex)
    if samples.shape != grid.shape:
        raise PreconditionError("sample array does not match the grid")
    if grid.l < 2 * lmax:
        raise PreconditionError(
            f"grid exactness {grid.l} is below 2*lmax = {2 * lmax}")
    nphi = len(grid.phis)
    # ring-wise Fourier analysis: G[j, k] = (2pi/nphi) sum_i f e^{-ik phi_i}
    g = np.fft.fft(samples, axis=1) * (2.0 * np.pi / nphi)
    wg = grid.weights[:, None] * g
    out = HarmonicCoeffs(lmax)
    for k in range(0, lmax + 1):
        bar = norm_assoc_legendre_all(lmax, k, grid.xs)   # (lmax+1, ntheta)
        pos = bar[k:] @ wg[:, k % nphi]
        out.values[k:, lmax + k] = pos
        if k > 0:
            neg = bar[k:] @ wg[:, (-k) % nphi]
            out.values[k:, lmax - k] = (-1) ** k * neg
    return out


def synthesize(coeffs: HarmonicCoeffs, theta, phi):
    """Pointwise sum ``f = sum c[n,k] Y_n^k`` at arbitrary points.

    ``theta`` and ``phi`` must have matching shapes; returns complex values
    of the same shape.  Orders whose coefficient column vanishes are
    skipped, so azimuthally band-limited expansions stay cheap.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    if theta.shape != phi.shape:
        raise PreconditionError("theta and phi shapes differ")
    shape = theta.shape
    x = np.cos(theta.ravel())
    lmax = coeffs.lmax
    vals = np.zeros(x.shape, dtype=complex)
    for k in range(-lmax, lmax + 1):
        col = coeffs.values[:, k + lmax]
        if not np.any(col):
            continue
        bar = norm_assoc_legendre_all(lmax, abs(k), x)
        if k < 0:
            bar = (-1.0) ** k * bar
        vals += (col @ bar) * np.exp(1j * k * phi.ravel())
    return vals.reshape(shape)


def synthesize_at_points(coeffs: HarmonicCoeffs, points):
    """Same as :func:`synthesize` for points given as unit vectors."""
    theta, phi = (np.asarray(a) for a in
                  (np.arccos(np.clip(np.asarray(points, dtype=float)[..., 2], -1, 1)),
                   np.arctan2(np.asarray(points, dtype=float)[..., 1],
                              np.asarray(points, dtype=float)[..., 0])))
    return synthesize(coeffs, theta, phi)
