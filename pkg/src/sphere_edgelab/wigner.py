"""Wigner d- and D-matrices, rotation of harmonic expansions, and fast
synthesis of rotational coefficient maps.

The degree-``n`` d-matrix is evaluated as ``exp(-i beta J_y)`` through the
eigendecomposition of the (phase-symmetrized) angular momentum generator,
which is real symmetric tridiagonal.  One decomposition per degree serves
every angle, every column slab and every map row, so it is cached (in
memory, and on disk when ``SPHERE_EDGELAB_CACHE`` is set).

Index convention: a degree-``n`` matrix is ``(2n+1) x (2n+1)`` with row
``k + n`` and column ``k' + n``, orders running ``-n .. n``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import PreconditionError, ValidationError
from .geometry import euler_decompose
from .harmonics import HarmonicCoeffs

_CACHE_ENV = "SPHERE_EDGELAB_CACHE"
_eig_cache: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _cache_dir():
    path = os.environ.get(_CACHE_ENV)
    if path:
        os.makedirs(path, exist_ok=True)
    return path


def _jy_eigensystem(n):
    """Eigenvalues/vectors of J_y at degree ``n`` plus the order phases.

    Returns ``(lam, w, phase)`` with ``J_y = P diag-free ...``; concretely
    ``exp(-i b J_y) = diag(phase) @ w @ diag(exp(-i b lam)) @ w.T @ diag(conj(phase))``.
    """
    hit = _eig_cache.get(n)
    if hit is not None:
        return hit
    cdir = _cache_dir()
    fname = os.path.join(cdir, f"wigner_eig_{n}.npz") if cdir else None
    if fname and os.path.exists(fname):
        data = np.load(fname)
        entry = (data["lam"], data["w"], data["phase"])
        _eig_cache[n] = entry
        return entry
    m = np.arange(-n, n + 1, dtype=float)
    if n == 0:
        lam, w = np.zeros(1), np.ones((1, 1))
    else:
        off = -0.5 * np.sqrt(n * (n + 1.0) - m[:-1] * (m[:-1] + 1.0))
        lam, w = eigh_tridiagonal(np.zeros(2 * n + 1), off)
    phase = np.exp(1j * (np.pi / 2.0) * m)
    entry = (lam, w, phase)
    _eig_cache[n] = entry
    if fname:
        np.savez(fname, lam=lam, w=w, phase=phase)
    return entry


def wigner_d(n, beta):
    """Real rotation matrix ``d^n(beta)`` (middle Euler factor)."""
    lam, w, phase = _jy_eigensystem(n)
    core = (w * np.exp(-1j * beta * lam)) @ w.T
    return np.real(phase[:, None] * core * np.conj(phase)[None, :])


def wigner_d_columns(n, betas, orders):
    """Column slab ``d^n[:, orders]`` for a batch of angles.

    ``orders`` is a sequence of column orders ``k'`` (``|k'| <= n``);
    returns a real array of shape ``(len(betas), 2n+1, len(orders))``.
    Grouping the batch into one matrix product per degree is what makes
    map synthesis tractable.
    """
    betas = np.atleast_1d(np.asarray(betas, dtype=float))
    orders = np.asarray(orders, dtype=int)
    if np.any(np.abs(orders) > n):
        raise PreconditionError("column order exceeds the degree")
    lam, w, phase = _jy_eigensystem(n)
    cols = orders + n
    b = w.T[:, cols] * np.conj(phase)[cols][None, :]          # (2n+1, ncols)
    e = np.exp(-1j * np.outer(betas, lam))                    # (nb, 2n+1)
    tmp = e[:, :, None] * b[None, :, :]
    tmp = tmp.transpose(1, 0, 2).reshape(2 * n + 1, -1)
    out = (w @ tmp).reshape(2 * n + 1, len(betas), len(cols)).transpose(1, 0, 2)
    return np.real(phase[None, :, None] * out)


def wigner_D(n, alpha, beta, gamma):
    """Complex rotation matrix ``D^n(alpha, beta, gamma)`` in zyz angles."""
    k = np.arange(-n, n + 1)
    d = wigner_d(n, beta)
    return np.exp(-1j * k * alpha)[:, None] * d * np.exp(-1j * k * gamma)[None, :]


@dataclass(frozen=True)
class WignerDStack:
    """All d-matrices up to a degree bound at one fixed angle."""

    beta: float
    lmax: int

    def __post_init__(self):
        object.__setattr__(self, "_mats",
                           [wigner_d(n, self.beta) for n in range(self.lmax + 1)])

    def matrix(self, n):
        if n > self.lmax:
            raise PreconditionError("degree beyond the stack bound")
        return self._mats[n]


def rotate_coeffs(coeffs: HarmonicCoeffs, rotation) -> HarmonicCoeffs:
    """Coefficients of ``y -> f(R^{-1} y)`` given those of ``f``.

    Applies ``D^n(alpha, beta, gamma)`` degree by degree; unitary, so each
    degree keeps its energy.
    """
    alpha, beta, gamma = euler_decompose(rotation)
    out = HarmonicCoeffs(coeffs.lmax)
    for n in range(coeffs.lmax + 1):
        row = coeffs.degree_slice(n)
        if not np.any(row):
            continue
        k = np.arange(-n, n + 1)
        rotated = np.exp(-1j * k * alpha) * (
            wigner_d(n, beta) @ (np.exp(-1j * k * gamma) * row))
        out.degree_slice(n)[:] = rotated
    return out


@dataclass
class CoefficientMap:
    """Rotational coefficient values on the standard map grid
    ``alpha_j = j pi / M (j = 1..2M)``, ``beta_l = l pi / M (l = 1..M)``
    at one fixed third angle ``gamma``."""

    m: int
    gamma: float
    values: np.ndarray               # real, shape (2M, M)
    wavelet_k: int
    wavelet_n: int
    imag_max: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (2 * self.m, self.m):
            raise ValidationError("map values must have shape (2M, M)")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("map contains non-finite values")

    @property
    def alphas(self):
        return np.pi * np.arange(1, 2 * self.m + 1) / self.m

    @property
    def betas(self):
        return np.pi * np.arange(1, self.m + 1) / self.m

    def save(self, csv_path, meta_path):
        """CSV matrix with beta rows / alpha columns plus a JSON sidecar."""
        import json

        rows = self.values.T                           # (M, 2M)
        with open(csv_path, "w") as fh:
            for row in rows:
                fh.write(",".join(f"{v:.17g}" for v in row))
                fh.write("\n")
        meta = {"M_alpha": 2 * self.m, "M_beta": self.m, "gamma": self.gamma,
                "K": self.wavelet_k, "N": self.wavelet_n,
                "imag_max": self.imag_max}
        with open(meta_path, "w") as fh:
            json.dump(meta, fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, csv_path, meta_path):
        import json

        with open(meta_path) as fh:
            meta = json.load(fh)
        rows = np.loadtxt(csv_path, delimiter=",", ndmin=2)
        return cls(m=meta["M_beta"], gamma=meta["gamma"], values=rows.T,
                   wavelet_k=meta["K"], wavelet_n=meta["N"],
                   imag_max=meta.get("imag_max", 0.0))


class SO3Synthesizer:
    """Evaluates ``W(alpha, beta, gamma) = sum f[n,k] conj(g[n,k'])
    conj(D^n_{k,k'}(alpha, beta, gamma))`` on grids and at points.

    ``g`` is expected to be azimuthally sparse (nonzero only on a few
    orders ``k'``), which keeps the per-degree work to a thin column slab
    of each d-matrix.
    """

    def __init__(self, f: HarmonicCoeffs, g: HarmonicCoeffs):
        if f.lmax != g.lmax:
            raise PreconditionError("signal and analysis degree bounds differ")
        self.lmax = f.lmax
        self.f = f
        self.g = g
        nz = np.any(g.values != 0.0, axis=0)
        self.orders = np.nonzero(nz)[0] - g.lmax
        if len(self.orders) == 0:
            self.orders = np.array([0])

    def order_table(self, betas):
        """Per-order amplitudes ``T[b, k + lmax, c]`` so that
        ``W = sum_{k,c} T exp(i k alpha) exp(i orders[c] gamma)``."""
        betas = np.atleast_1d(np.asarray(betas, dtype=float))
        L = self.lmax
        table = np.zeros((len(betas), 2 * L + 1, len(self.orders)), dtype=complex)
        for n in range(L + 1):
            frow = self.f.degree_slice(n)
            grow = np.array([self.g.get(n, int(c)) for c in self.orders])
            usable = np.abs(self.orders) <= n
            if not np.any(frow) or not np.any(grow[usable]):
                continue
            cols = self.orders[usable]
            slab = wigner_d_columns(n, betas, cols)
            contrib = slab * frow[None, :, None] * np.conj(grow[usable])[None, None, :]
            block = table[:, L - n:L + n + 1, :]
            block[:, :, usable] += contrib
        return table

    def gamma_contract(self, table, gamma):
        """Collapse the ``k'`` axis at a fixed third angle."""
        phases = np.exp(1j * self.orders * gamma)
        return table @ phases

    def value(self, alpha, beta, gamma):
        amps = self.gamma_contract(self.order_table([beta]), gamma)[0]
        k = np.arange(-self.lmax, self.lmax + 1)
        return complex(np.sum(amps * np.exp(1j * k * alpha)))

    def map(self, m, gamma, order_table=None):
        """Complex map values on the standard grid, shape ``(2M, M)``."""
        betas = np.pi * np.arange(1, m + 1) / m
        if order_table is None:
            order_table = self.order_table(betas)
        amps = self.gamma_contract(order_table, gamma)       # (M, 2L+1)
        alphas = np.pi * np.arange(1, 2 * m + 1) / m
        k = np.arange(-self.lmax, self.lmax + 1)
        basis = np.exp(1j * np.outer(k, alphas))             # (2L+1, 2M)
        return (amps @ basis).T                              # (2M, M)


def so3_synthesis(f: HarmonicCoeffs, g: HarmonicCoeffs, m, gamma,
                  wavelet_k=0, wavelet_n=0) -> CoefficientMap:
    """Coefficient map of signal ``f`` against analysis function ``g``."""
    synth = SO3Synthesizer(f, g)
    vals = synth.map(m, gamma)
    return CoefficientMap(m=m, gamma=float(gamma), values=vals.real,
                          wavelet_k=wavelet_k, wavelet_n=wavelet_n,
                          imag_max=float(np.max(np.abs(vals.imag))))
