import math

import numpy as np
import pytest

from sphere_edgelab import (DomainError, HarmonicCoeffs, PreconditionError,
                            assoc_legendre, legendre, make_grid, sht_forward,
                            sph_harm, synthesize)
from sphere_edgelab.harmonics import norm_assoc_legendre_all


def rodrigues_assoc(n, k, x):
    """Independent route: differentiate the Legendre series k times."""
    poly = np.polynomial.legendre.Legendre.basis(n).convert(kind=np.polynomial.Polynomial)
    for _ in range(k):
        poly = poly.deriv()
    return (1.0 - x ** 2) ** (k / 2.0) * poly(x)


def test_legendre_values():
    assert legendre(0, 0.3) == 1.0
    assert abs(legendre(2, 0.5) + 0.125) < 1e-15
    assert abs(legendre(3, 0.0)) < 1e-15


def test_legendre_bounded(rng):
    xs = rng.uniform(-1, 1, 200)
    for n in (1, 5, 20, 101):
        assert np.all(np.abs(legendre(n, xs)) <= 1.0 + 1e-12)


def test_legendre_domain():
    with pytest.raises(DomainError):
        legendre(3, 1.5)


def test_assoc_legendre_order_zero(rng):
    xs = rng.uniform(-1, 1, 50)
    for n in range(7):
        np.testing.assert_allclose(assoc_legendre(n, 0, xs), legendre(n, xs),
                                   atol=1e-13)


def test_assoc_legendre_example():
    # hand-differentiated P3: sqrt(0.75) * (15 * 0.25 - 3) / 2
    expected = math.sqrt(0.75) * (15 * 0.25 - 3) / 2.0
    assert abs(assoc_legendre(3, 1, 0.5) - expected) < 1e-12
    assert abs(expected - 0.324760) < 1e-6


def test_assoc_legendre_negative_order(rng):
    xs = rng.uniform(-1, 1, 20)
    np.testing.assert_allclose(assoc_legendre(2, -1, xs),
                               -assoc_legendre(2, 1, xs) / 6.0, atol=1e-13)


def test_assoc_legendre_above_degree():
    assert np.all(assoc_legendre(3, 5, np.array([0.2])) == 0.0)


def test_assoc_legendre_vs_rodrigues(rng):
    xs = rng.uniform(-0.999, 0.999, 100)
    for n in range(9):
        for k in range(n + 1):
            np.testing.assert_allclose(assoc_legendre(n, k, xs),
                                       rodrigues_assoc(n, k, xs), atol=1e-10)


def test_sph_harm_values():
    assert abs(sph_harm(0, 0, 0.7, 1.1) - 1.0 / math.sqrt(4 * math.pi)) < 1e-15
    assert abs(sph_harm(0, 0, 0.7, 1.1).real - 0.2820948) < 1e-7
    v = sph_harm(1, 0, 0.0, 0.3)
    assert abs(v - math.sqrt(3.0 / (4.0 * math.pi))) < 1e-14
    assert abs(v.real - 0.4886025) < 1e-7


def test_sph_harm_symmetry(rng):
    for _ in range(60):
        n = int(rng.integers(0, 14))
        k = int(rng.integers(-n, n + 1)) if n else 0
        th, ph = rng.uniform(0.01, np.pi - 0.01), rng.uniform(0, 2 * np.pi)
        lhs = sph_harm(n, -k, th, ph)
        rhs = (-1.0) ** k * np.conj(sph_harm(n, k, th, ph))
        assert abs(lhs - rhs) < 1e-13


def test_sph_harm_domain():
    with pytest.raises(DomainError):
        sph_harm(2, 3, 0.4, 0.1)


def test_addition_theorem_bound(rng):
    xs = rng.uniform(-1, 1, 100)
    for k in (0, 3, 57, 110):
        bar = norm_assoc_legendre_all(120, k, xs)
        bound = np.sqrt((2 * np.arange(121) + 1) / (4 * np.pi))
        assert np.all(np.abs(bar) <= bound[:, None] + 1e-12)


def test_grid_structure():
    grid = make_grid(24)
    assert len(grid.thetas) >= (24 + 1 + 1) // 2
    assert len(grid.phis) >= 25
    assert np.all(grid.weights > 0)
    total = np.sum(grid.weights) * 2 * np.pi
    assert abs(total - 4 * np.pi) < 1e-10


def test_grid_integrates_constants_and_harmonics():
    grid = make_grid(16)
    val = grid.integrate(grid.sample(lambda t, p: sph_harm(0, 0, t, p)))
    assert abs(val - math.sqrt(4 * math.pi)) < 1e-12
    y21 = grid.sample(lambda t, p: sph_harm(2, 1, t, p))
    y31 = grid.sample(lambda t, p: sph_harm(3, 1, t, p))
    assert abs(grid.integrate(y21 * np.conj(y21)) - 1.0) < 1e-12
    assert abs(grid.integrate(y31 * np.conj(y21))) < 1e-12


def test_quadrature_exactness_random_polynomial(rng):
    # any polynomial of degree <= L integrates to sqrt(4 pi) times its
    # constant-mode coefficient
    lmax = 9
    coeffs = HarmonicCoeffs(lmax)
    for n in range(lmax + 1):
        for k in range(-n, n + 1):
            coeffs.set(n, k, rng.normal() + 1j * rng.normal())
    grid = make_grid(lmax)
    vals = grid.sample(lambda t, p: synthesize(coeffs, t, p))
    integral = grid.integrate(vals)
    assert abs(integral - math.sqrt(4 * math.pi) * coeffs.get(0, 0)) < 1e-9


def random_coeffs(lmax, rng, real_signal=False):
    out = HarmonicCoeffs(lmax)
    for n in range(lmax + 1):
        out.set(n, 0, rng.normal() if real_signal
                else rng.normal() + 1j * rng.normal())
        for k in range(1, n + 1):
            c = rng.normal() + 1j * rng.normal()
            out.set(n, k, c)
            out.set(n, -k, (-1.0) ** k * np.conj(c) if real_signal
                    else rng.normal() + 1j * rng.normal())
    return out


def test_forward_delta():
    coeffs = HarmonicCoeffs(6)
    coeffs.set(5, 3, 1.0)
    grid = make_grid(12)
    vals = grid.sample(lambda t, p: synthesize(coeffs, t, p))
    back = sht_forward(vals, grid, 6)
    expected = np.zeros_like(back.values)
    expected[5, 3 + 6] = 1.0
    np.testing.assert_allclose(back.values, expected, atol=1e-12)


def test_forward_round_trip(rng):
    lmax = 11
    coeffs = random_coeffs(lmax, rng)
    grid = make_grid(2 * lmax)
    vals = grid.sample(lambda t, p: synthesize(coeffs, t, p))
    back = sht_forward(vals, grid, lmax)
    assert np.max(np.abs(back.values - coeffs.values)) < 1e-10


def test_parseval(rng):
    lmax = 10
    coeffs = random_coeffs(lmax, rng)
    grid = make_grid(2 * lmax)
    vals = grid.sample(lambda t, p: synthesize(coeffs, t, p))
    energy = grid.integrate(vals * np.conj(vals)).real
    assert abs(energy - np.sum(np.abs(coeffs.values) ** 2)) < 1e-9


def test_forward_grid_too_small():
    grid = make_grid(10)
    with pytest.raises(PreconditionError):
        sht_forward(np.zeros(grid.shape), grid, 8)


def test_real_signal_symmetry(rng):
    coeffs = random_coeffs(8, rng, real_signal=True)
    assert coeffs.real_symmetry_error() < 1e-12
    grid = make_grid(16)
    vals = grid.sample(lambda t, p: synthesize(coeffs, t, p))
    assert np.max(np.abs(vals.imag)) < 1e-10


def test_coeffs_csv_round_trip(tmp_path, rng):
    coeffs = random_coeffs(5, rng)
    path = tmp_path / "coeffs.csv"
    coeffs.save_csv(path)
    header = path.read_text().splitlines()[0]
    assert header == "n,k,re,im"
    back = HarmonicCoeffs.load_csv(path)
    assert back.lmax == 5
    np.testing.assert_allclose(back.values, coeffs.values, atol=1e-15)
