"""Acceptance criteria for the package, one test per criterion.

Each test prints a single PASS line with its measured figure once its
assertions hold (run with ``pytest -s`` to see them live).
"""

import math
import time

import numpy as np
import pytest

from sphere_edgelab import (Cap, HarmonicCoeffs, WaveletSpec, boundary_curve,
                            cap_harmonic_coeffs, cap_region,
                            cap_residual_study, cap_area_difference, chi,
                            coefficient_map, decay_profile, demo_region,
                            frame_coefficient, frame_to_rotation,
                            geodesic_distance, interval_estimate,
                            make_grid, map_synthesizer, peak_extract,
                            region_harmonic_coeffs, segment_validate,
                            sphere_point, sparsity_ratio, synthesize,
                            TangentFrame, wavelet_coeffs)
from sphere_edgelab.analysis import normal_frame
from sphere_edgelab.cli import main as cli_main
from sphere_edgelab.geometry import project_to_tangent
from sphere_edgelab.wavelets import localization_profile, wavelet_synthesize


def report(num, detail):
    print(f"\nACCEPTANCE {num}: PASS — {detail}", flush=True)


def random_coeffs(lmax, rng):
    out = HarmonicCoeffs(lmax)
    for n in range(lmax + 1):
        for k in range(-n, n + 1):
            out.set(n, k, rng.normal() + 1j * rng.normal())
    return out


def test_acceptance_01_spectral_vs_quadrature_oracle():
    """frame_coefficient agrees with direct quadrature to 1e-8 relative."""
    t0 = time.time()
    rng = np.random.default_rng(11)
    n_dil, lmax = 16, 32
    grid = make_grid(2 * lmax)
    worst = 0.0
    for i in range(20):
        f = random_coeffs(lmax, rng)
        fv = grid.sample(lambda t, p: synthesize(f, t, p))
        for k_sel in (1, 2, 4):
            spec = WaveletSpec(k=k_sel, n=n_dil)
            x = sphere_point(rng.uniform(0.1, np.pi - 0.1),
                             rng.uniform(0, 2 * np.pi))
            r = project_to_tangent(x, rng.normal(size=3))
            frame = TangentFrame(x, r)
            rot = frame_to_rotation(frame)

            def moved(pts):
                loc = pts @ rot
                th = np.arccos(np.clip(loc[..., 2], -1, 1))
                ph = np.arctan2(loc[..., 1], loc[..., 0])
                return wavelet_synthesize(spec, th, ph)

            pv = grid.sample_points(moved)
            w_quad = complex(grid.integrate(fv * np.conj(pv)))
            w_spec = frame_coefficient(f, spec, frame)
            worst = max(worst, abs(w_spec - w_quad) / abs(w_quad))
    elapsed = time.time() - t0
    assert worst <= 1e-8
    assert elapsed < 60.0
    report(1, f"max relative error {worst:.2e} over 60 cases in {elapsed:.1f}s")


def test_acceptance_02_cap_coefficients_against_sampling():
    """Closed-form cap coefficients match the sampled transform at 2e-3,
    improving as the grid degree doubles."""
    cap = Cap(sphere_point(0.8, 0.4), math.pi / 3)
    closed = cap_harmonic_coeffs(cap, 64)
    region = cap_region(cap)
    approx512, _ = region_harmonic_coeffs(region, 64, 512)
    err512 = float(np.max(np.abs(approx512.values - closed.values)))
    approx1024, _ = region_harmonic_coeffs(region, 64, 1024)
    err1024 = float(np.max(np.abs(approx1024.values - closed.values)))
    assert err512 <= 2e-3
    assert err1024 < err512
    report(2, f"max abs error {err512:.2e} (grid 512) -> {err1024:.2e} (grid 1024)")


def test_acceptance_03_chi_exactness_and_parity():
    """chi_1 = 1 and chi_2 = sqrt(2) cos to 1e-12; parity for K <= 16."""
    gammas = np.linspace(0.0, 2.0 * np.pi, 1000)
    e1 = float(np.max(np.abs(chi(1, gammas) - 1.0)))
    e2 = float(np.max(np.abs(chi(2, gammas) - np.sqrt(2) * np.cos(gammas))))
    worst_parity = 0.0
    for k_sel in range(1, 17):
        vals = chi(k_sel, gammas)
        flip = chi(k_sel, gammas + np.pi)
        worst_parity = max(worst_parity, float(np.max(np.abs(
            flip - (-1.0) ** (k_sel + 1) * vals))))
    assert e1 <= 1e-12 and e2 <= 1e-12 and worst_parity <= 1e-12
    report(3, f"chi errors {e1:.1e}/{e2:.1e}, parity {worst_parity:.1e}")


def test_acceptance_04_localization_bounds():
    """Tail slope <= -4 for K <= 4 and a stable weighted sup across N."""
    slopes = {}
    sups = {k: [] for k in (1, 2, 3, 4)}
    for k_sel in (1, 2, 3, 4):
        for n_dil in (32, 64, 128):
            rep = localization_profile(WaveletSpec(k=k_sel, n=n_dil), nphi=128)
            sups[k_sel].append(rep.sup_weighted)
            if n_dil == 64:
                slopes[k_sel] = rep.tail_slope
    assert all(s <= -4.0 for s in slopes.values()), slopes
    ratios = {k: max(v) / min(v) for k, v in sups.items()}
    assert all(r <= 2.0 for r in ratios.values()), ratios
    report(4, "slopes " + ", ".join(f"K={k}: {s:.1f}" for k, s in slopes.items())
           + "; sup ratios " + ", ".join(f"{r:.2f}" for r in ratios.values()))


def test_acceptance_05_cap_leading_term_residual():
    """Residual of the closed-form leading part is O(1/N) for a cap."""
    t0 = time.time()
    cap = Cap(np.array([0.0, 0.0, 1.0]), math.pi / 3)
    spreads = {}
    for k_sel in (1, 2):
        study = cap_residual_study(cap, k_sel, [32, 64, 128],
                                   u_values=(0.0, 1.0, 2.0, 4.0))
        spreads[k_sel] = study.scaled_spread
    elapsed = time.time() - t0
    assert all(s <= 3.0 for s in spreads.values()), spreads
    assert elapsed < 600.0
    report(5, f"residual*N spreads K=1: {spreads[1]:.2f}, K=2: {spreads[2]:.2f} "
           f"in {elapsed:.1f}s")


def test_acceptance_06_symmetric_difference_quartic(wiggly_region, wiggly_curve):
    """Region-vs-osculating-cap area inside shrinking windows scales ~r^4."""
    rep = segment_validate(wiggly_curve, 0.0, wiggly_curve.length, delta=1.0)
    p = 0.25 * wiggly_curve.length
    radii = [rep.d_delta / f for f in (4.0, 8.0, 16.0, 32.0)]
    areas = [cap_area_difference(wiggly_region, wiggly_curve, p, r,
                                 d_delta=rep.d_delta) for r in radii]
    slope = float(np.polyfit(np.log(radii), np.log(areas), 1)[0])
    assert 3.5 <= slope <= 4.5
    report(6, f"log-log slope {slope:.3f} over radii "
           f"[{radii[-1]:.2e}, {radii[0]:.2e}]")


def test_acceptance_07_peak_stability_and_decay(wiggly_region, wiggly_curve):
    """Peak magnitude along the normal is stable in N and decays far out."""
    k_sel = 2
    p = 0.25 * wiggly_curve.length
    lo, hi, _ = interval_estimate(WaveletSpec(k=k_sel, n=64), samples=1500)
    us = np.linspace(lo, hi, 9)
    peaks, far_ratios = {}, {}
    for n_dil in (64, 128):
        lmax = 2 * n_dil
        f, _ = region_harmonic_coeffs(wiggly_region, lmax, 2 * lmax)
        spec = WaveletSpec(k=k_sel, n=n_dil)
        prof = decay_profile(f, wiggly_curve, spec, p,
                             [u / n_dil for u in us] + [20.0 / n_dil])
        peaks[n_dil] = float(np.max(prof.magnitudes[:-1]))
        far_ratios[n_dil] = float(prof.magnitudes[-1] / peaks[n_dil])
    change = abs(peaks[128] - peaks[64]) / peaks[64]
    assert change <= 0.25
    assert all(r <= 0.10 for r in far_ratios.values()), far_ratios
    report(7, f"peak change {100 * change:.1f}%, far-field ratios "
           f"{far_ratios[64]:.4f}/{far_ratios[128]:.4f}")


def test_acceptance_08_edge_map_concentration(wiggly_region, wiggly_curve):
    """Top-1% map values hug the boundary; orientations match the tangent."""
    n_dil, k_sel, m = 64, 4, 200
    lmax = 2 * n_dil
    f, _ = region_harmonic_coeffs(wiggly_region, lmax, 2 * lmax)
    spec = WaveletSpec(k=k_sel, n=n_dil)
    synth = map_synthesizer(f, spec)
    band = 3.0 * np.pi / n_dil
    curve_pts = wiggly_curve.table_points[::4]
    fractions, orient_fracs = [], []
    for gamma in (0.0, math.pi / 2.0):
        cmap = coefficient_map(f, spec, m, gamma, synthesizer=synth)
        mag = np.abs(cmap.values)
        thresh = np.quantile(mag, 0.99)
        jj, ll = np.nonzero(mag >= thresh)
        pts = sphere_point(cmap.betas[ll], cmap.alphas[jj])
        dmin = np.min(geodesic_distance(pts[:, None, :],
                                        curve_pts[None, :, :]), axis=1)
        fractions.append(float(np.mean(dmin <= band)))
        peaks = peak_extract(cmap, synthesizer=synth, quantile=0.99,
                             curve=wiggly_curve)
        errs = np.array([p.orientation_error for p in peaks
                         if np.isfinite(p.orientation_error)])
        orient_fracs.append(float(np.mean(errs <= np.pi / 8.0)))
    assert all(fr >= 0.95 for fr in fractions), fractions
    assert all(of >= 0.80 for of in orient_fracs), orient_fracs
    report(8, f"boundary fractions {fractions[0]:.3f}/{fractions[1]:.3f}, "
           f"orientation fractions {orient_fracs[0]:.2f}/{orient_fracs[1]:.2f}")


def test_acceptance_09_sorted_magnitude_sparsity(wiggly_region):
    """Maps sharpen with N: the 99th-percentile/median ratio grows."""
    ratios = []
    for n_dil in (32, 64, 128):
        lmax = 2 * n_dil
        f, _ = region_harmonic_coeffs(wiggly_region, lmax, 2 * lmax)
        spec = WaveletSpec(k=4, n=n_dil)
        cmap = coefficient_map(f, spec, 100, math.pi / 2.0)
        ratios.append(sparsity_ratio(cmap))
    assert ratios[0] < ratios[1] < ratios[2], ratios
    report(9, "sparsity ratios " + " -> ".join(f"{r:.0f}" for r in ratios))


def test_acceptance_10_deterministic_maps(tmp_path):
    """Identical configs produce bit-identical map and peak files."""
    import json

    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({
        "wavelet": {"K": 2, "N": 16},
        "grid": {"M": 40, "gamma": [0.0, math.pi / 2.0]},
    }))
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert cli_main(["edge-map", "--config", str(cfg_path), "--out", str(out1)]) == 0
    assert cli_main(["edge-map", "--config", str(cfg_path), "--out", str(out2)]) == 0
    names = [p.name for p in sorted(out1.iterdir()) if p.suffix == ".csv"]
    assert names
    for name in names:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name
    report(10, f"{len(names)} CSV files bit-identical across two runs")
