"""Command-line entry points tying the pipeline together.

Commands (all driven by a JSON config, see the README):

* ``synth-wavelet`` -- spatial wavelet samples, coefficients and a
  localization report;
* ``chi``           -- the angular response functions on a grid;
* ``cap-verify``    -- leading-term residual check against exact cap
  coefficients (nonzero exit when the O(1/N) behavior fails);
* ``curve-verify``  -- osculating-cap tangency, symmetric-difference
  growth rate, and the latitude-chord distance identity;
* ``edge-map``      -- coefficient maps, sorted magnitudes and peak lists
  for a region signal;
* ``residuals``     -- residual and cap-difference decay study on a region.

Exit codes: 0 success, 2 validation/acceptance failure, 3 precondition
error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import analysis, regions, wavelets
from .errors import PreconditionError, ValidationError
from .geometry import Cap, sphere_point
from .harmonics import make_grid, sht_forward
from .wavelets import WaveletSpec, WindowKappa, chi, default_window

try:
    import jsonschema
except ImportError:                                  # pragma: no cover
    jsonschema = None

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "wavelet": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "K": {"anyOf": [{"type": "integer", "minimum": 1},
                                {"type": "array",
                                 "items": {"type": "integer", "minimum": 1}}]},
                "N": {"anyOf": [{"type": "integer", "minimum": 1},
                                {"type": "array",
                                 "items": {"type": "integer", "minimum": 1}}]},
                "window": {"type": "string"},
            },
        },
        "region": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "spec": {"type": "string"},
                "builtin": {"type": "string", "enum": ["demo"]},
                "cap": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["phi0"],
                    "properties": {
                        "center_euler": {"type": "array", "minItems": 2,
                                         "maxItems": 2,
                                         "items": {"type": "number"}},
                        "phi0": {"type": "number", "exclusiveMinimum": 0,
                                 "exclusiveMaximum": math.pi},
                    },
                },
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "M": {"type": "integer", "minimum": 2},
                "gamma": {"type": "array", "items": {"type": "number"}},
                "L": {"type": "integer", "minimum": 0},
                "quad_degree": {"type": "integer", "minimum": 0},
            },
        },
        "study": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "u_values": {"type": "array", "items": {"type": "number"}},
                "points": {"type": "array", "items": {"type": "number"}},
                "quantile": {"type": "number", "minimum": 0, "maximum": 1},
                "delta": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "fit_point": {"type": "number"},
                "chi_K": {"type": "array",
                          "items": {"type": "integer", "minimum": 1}},
                "gamma_samples": {"type": "integer", "minimum": 8},
                "map_rows": {"type": "integer", "minimum": 16},
            },
        },
        "out": {"type": "string"},
    },
}


def load_config(path):
    if path is None:
        return {}
    with open(path) as fh:
        cfg = json.load(fh)
    if jsonschema is not None:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    referenced = []
    if "spec" in cfg.get("region", {}):
        referenced.append(cfg["region"]["spec"])
    if "window" in cfg.get("wavelet", {}):
        referenced.append(cfg["wavelet"]["window"])
    for ref in referenced:
        if not os.path.exists(ref):
            raise ValidationError(f"referenced file does not exist: {ref}")
    return cfg


def _as_list(value, default):
    if value is None:
        return list(default)
    if isinstance(value, (int, float)):
        return [value]
    return list(value)


def _window_from(cfg):
    path = cfg.get("wavelet", {}).get("window")
    return WindowKappa.load_csv(path) if path else default_window()


def _region_from(cfg):
    rc = cfg.get("region", {"builtin": "demo"})
    if "spec" in rc:
        return regions.GraphRegion.load_json(rc["spec"])
    if "cap" in rc:
        alpha, beta = rc["cap"].get("center_euler", [0.0, 0.0])
        return regions.cap_region(Cap(sphere_point(beta, alpha),
                                      rc["cap"]["phi0"]))
    return regions.demo_region()


def _cap_from(cfg):
    rc = cfg.get("region", {})
    if "cap" in rc:
        alpha, beta = rc["cap"].get("center_euler", [0.0, 0.0])
        return Cap(sphere_point(beta, alpha), rc["cap"]["phi0"])
    return Cap(sphere_point(0.8, 0.4), math.pi / 3.0)


def _outdir(args):
    out = args.out or "edgelab-out"
    os.makedirs(out, exist_ok=True)
    return out


def _emit(path):
    print(f"wrote {path}")


def run_parallel(tasks, threads):
    """Run independent thunks, preserving order; sequential when
    ``threads <= 1`` (results are identical either way)."""
    if threads <= 1 or len(tasks) <= 1:
        return [t() for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(t) for t in tasks]
        return [f.result() for f in futures]


def _write_meta(out, name, args, cfg, extra=None):
    meta = {"command": name, "config": cfg, "seed": args.seed,
            "threads": args.threads}
    meta.update(extra or {})
    path = os.path.join(out, f"{name}-meta.json")
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True, default=float)
        fh.write("\n")
    _emit(path)


def cmd_synth_wavelet(args, cfg):
    out = _outdir(args)
    window = _window_from(cfg)
    wc = cfg.get("wavelet", {})
    klist = _as_list(wc.get("K"), [1])
    nlist = _as_list(wc.get("N"), [32])
    rows = cfg.get("study", {}).get("map_rows", 181)
    for k in klist:
        for n in nlist:
            spec = WaveletSpec(k=k, n=n, window=window)
            tag = f"K{k}_N{n}"
            coeffs = wavelets.wavelet_coeffs(spec)
            cpath = os.path.join(out, f"wavelet_coeffs_{tag}.csv")
            coeffs.save_csv(cpath)
            _emit(cpath)

            thetas = np.linspace(0.0, np.pi, rows)
            phis = np.linspace(0.0, 2.0 * np.pi, 2 * rows, endpoint=False)
            tt, pp = np.meshgrid(thetas, phis, indexing="ij")
            vals = wavelets.wavelet_synthesize(spec, tt, pp).real
            mpath = os.path.join(out, f"wavelet_map_{tag}.csv")
            np.savetxt(mpath, vals, delimiter=",", fmt="%.17g")
            _emit(mpath)
            ppath = os.path.join(out, f"wavelet_map_{tag}.pgm")
            analysis.write_pgm(ppath, vals, ppath + ".json")
            _emit(ppath)

            report = wavelets.localization_profile(spec)
            lpath = os.path.join(out, f"localization_{tag}.csv")
            report.save_csv(lpath)
            _emit(lpath)
    _write_meta(out, "synth-wavelet", args, cfg)
    return 0


def cmd_chi(args, cfg):
    out = _outdir(args)
    klist = cfg.get("study", {}).get("chi_K")
    if klist is None:
        klist = _as_list(cfg.get("wavelet", {}).get("K"), [1, 2, 3, 4, 8, 16])
    samples = cfg.get("study", {}).get("gamma_samples", 512)
    gammas = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
    path = os.path.join(out, "chi.csv")
    with open(path, "w") as fh:
        fh.write("gamma," + ",".join(f"chi_{k}" for k in klist) + "\n")
        cols = [chi(k, gammas) for k in klist]
        for i, g in enumerate(gammas):
            fh.write(f"{g:.17g}," + ",".join(f"{c[i]:.17g}" for c in cols) + "\n")
    _emit(path)
    _write_meta(out, "chi", args, cfg)
    return 0


def cmd_cap_verify(args, cfg):
    out = _outdir(args)
    cap = _cap_from(cfg)
    window = _window_from(cfg)
    wc = cfg.get("wavelet", {})
    klist = _as_list(wc.get("K"), [1, 2])
    nlist = _as_list(wc.get("N"), [32, 64, 128])
    u_values = cfg.get("study", {}).get("u_values", [0.0, 1.0, 2.0, 4.0])

    tasks = [lambda k=k: analysis.cap_residual_study(cap, k, nlist,
                                                     u_values=tuple(u_values),
                                                     window=window)
             for k in klist]
    studies = run_parallel(tasks, args.threads)
    ok = True
    for k, study in zip(klist, studies):
        path = os.path.join(out, f"cap_residuals_K{k}.csv")
        study.save_csv(path)
        _emit(path)
        print(f"K={k}: residual*N spread {study.scaled_spread:.3f} "
              f"(exponent {study.exponent:.3f})")
        if study.scaled_spread > 3.0:
            ok = False
    _write_meta(out, "cap-verify", args, cfg,
                {"scaled_spreads": {str(k): s.scaled_spread
                                    for k, s in zip(klist, studies)}})
    if not ok:
        print("cap-verify FAILED: residual decay slower than 1/N", file=sys.stderr)
        return 2
    return 0


def cmd_curve_verify(args, cfg):
    out = _outdir(args)
    region = _region_from(cfg)
    curve = regions.boundary_curve(region)
    delta = cfg.get("study", {}).get("delta", 1.0)
    report = regions.segment_validate(curve, 0.0, curve.length, delta)

    ok = True
    # osculating-cap tangency along the curve
    ts = np.linspace(0.0, curve.length, 32, endpoint=False)
    tpath = os.path.join(out, "tangency.csv")
    worst = 0.0
    with open(tpath, "w") as fh:
        fh.write("t,pos_residual,tangent_residual,second_deriv_residual\n")
        for t in ts:
            oc = regions.osculating_cap(curve, t)
            r = regions.cap_tangency_residuals(oc, curve.point(t),
                                               curve.deriv1(t), curve.deriv2(t))
            worst = max(worst, *r)
            fh.write(f"{t:.17g},{r[0]:.17g},{r[1]:.17g},{r[2]:.17g}\n")
    _emit(tpath)
    if worst > 1e-6:
        ok = False
        print(f"tangency residual too large: {worst:.2e}", file=sys.stderr)

    # symmetric-difference growth near one boundary point
    p_fit = cfg.get("study", {}).get("fit_point", 0.25 * curve.length)
    radii = [report.d_delta / 4.0, report.d_delta / 8.0,
             report.d_delta / 16.0, report.d_delta / 32.0]
    areas = [regions.cap_area_difference(region, curve, p_fit, r,
                                         d_delta=report.d_delta) for r in radii]
    if max(areas) < 1e-13:
        slope = None       # boundary is itself a circle: nothing to fit
    else:
        slope = float(np.polyfit(np.log(radii),
                                 np.log(np.maximum(areas, 1e-300)), 1)[0])
    apath = os.path.join(out, "area_difference.csv")
    with open(apath, "w") as fh:
        fh.write("r,area\n")
        for r, a in zip(radii, areas):
            fh.write(f"{r:.17g},{a:.17g}\n")
        fh.write(f"# slope,{slope if slope is None else format(slope, '.17g')}\n")
    _emit(apath)
    if slope is not None and not 3.5 <= slope <= 4.5:
        ok = False
        print(f"area-difference slope {slope:.3f} outside [3.5, 4.5]",
              file=sys.stderr)

    # latitude-chord identity on a grid
    from .geometry import geodesic_distance, latitude_circle_distance

    lat = np.linspace(0.05, np.pi - 0.05, 50)
    lon = np.linspace(-np.pi, np.pi, 50)
    worst_lat = 0.0
    bound_ok = True
    for th in lat:
        d1 = geodesic_distance(sphere_point(th, 0.0),
                               sphere_point(np.full_like(lon, th), lon))
        d2 = latitude_circle_distance(th, lon)
        worst_lat = max(worst_lat, float(np.max(np.abs(d1 - d2))))
        lower = np.sqrt(np.maximum(0.0, 1.0 - lon ** 2 / 12.0)) \
            * np.abs(lon) * np.sin(th)
        if np.any(lower > d2 + 1e-12):
            bound_ok = False
    if worst_lat > 1e-12 or not bound_ok:
        ok = False
        print("latitude-chord identity check failed", file=sys.stderr)

    _write_meta(out, "curve-verify", args, cfg, {
        "phi_star": report.phi_star, "d_delta": report.d_delta,
        "eq1_ok": report.eq1_ok, "sup_d3": report.sup_d3,
        "tangency_worst": worst, "area_slope": slope,
        "latitude_identity_worst": worst_lat})
    return 0 if ok else 2


def cmd_edge_map(args, cfg):
    out = _outdir(args)
    t_start = time.time()
    region = _region_from(cfg)
    curve = regions.boundary_curve(region)
    window = _window_from(cfg)
    wc = cfg.get("wavelet", {})
    k = _as_list(wc.get("K"), [4])[0]
    n = _as_list(wc.get("N"), [64])[0]
    gc = cfg.get("grid", {})
    m = gc.get("M", 200)
    gammas = gc.get("gamma", [0.0, math.pi / 2.0])
    lmax = gc.get("L", 2 * n)
    if lmax < 2 * n:
        raise PreconditionError(f"grid.L = {lmax} cannot hold the wavelet "
                                f"band (needs >= {2 * n})")
    quad_degree = gc.get("quad_degree", 2 * lmax)
    quantile = cfg.get("study", {}).get("quantile", 0.99)

    spec = WaveletSpec(k=k, n=n, window=window)
    f, tail = regions.region_harmonic_coeffs(region, lmax, quad_degree)
    synth = analysis.map_synthesizer(f, spec)
    betas = np.pi * np.arange(1, m + 1) / m
    table = synth.order_table(betas)

    written = []
    for gamma in gammas:
        grid_vals = synth.map(m, gamma, order_table=table)
        cmap = analysis.CoefficientMap(m=m, gamma=float(gamma),
                                       values=grid_vals.real,
                                       wavelet_k=k, wavelet_n=n,
                                       imag_max=float(np.max(np.abs(grid_vals.imag))))
        tag = f"K{k}_N{n}_g{gamma:g}"
        cpath = os.path.join(out, f"map_{tag}.csv")
        jpath = os.path.join(out, f"map_{tag}.json")
        cmap.save(cpath, jpath)
        _emit(cpath)
        _emit(jpath)
        ppath = os.path.join(out, f"map_{tag}.pgm")
        analysis.write_pgm(ppath, cmap.values.T, ppath + ".json")
        _emit(ppath)

        spath = os.path.join(out, f"sorted_magnitudes_{tag}.csv")
        mags = analysis.sorted_magnitudes(cmap)
        with open(spath, "w") as fh:
            fh.write("rank,magnitude\n")
            for i, v in enumerate(mags):
                fh.write(f"{i},{v:.17g}\n")
        _emit(spath)

        peaks = analysis.peak_extract(cmap, synthesizer=synth,
                                      quantile=quantile, curve=curve)
        kpath = os.path.join(out, f"peaks_{tag}.csv")
        analysis.save_peaks_csv(peaks, kpath)
        _emit(kpath)
        written.append(tag)

    _write_meta(out, "edge-map", args, cfg, {
        "tags": written, "tail_energy_ratio": tail,
        "elapsed_s": time.time() - t_start})
    return 0


def cmd_residuals(args, cfg):
    out = _outdir(args)
    region = _region_from(cfg)
    curve = regions.boundary_curve(region)
    window = _window_from(cfg)
    wc = cfg.get("wavelet", {})
    k = _as_list(wc.get("K"), [2])[0]
    nlist = _as_list(wc.get("N"), [32, 64, 128])
    sc = cfg.get("study", {})
    points = sc.get("points", [0.25 * curve.length])
    u_values = sc.get("u_values", [0.0, 1.0, 2.0])

    res, gaps = analysis.region_residual_study(region, curve, k, nlist,
                                               points, tuple(u_values),
                                               window=window)
    rpath = os.path.join(out, f"residuals_K{k}.csv")
    res.save_csv(rpath)
    _emit(rpath)
    gpath = os.path.join(out, f"cap_gap_K{k}.csv")
    gaps.save_csv(gpath)
    _emit(gpath)
    print(f"residual exponent {res.exponent:.3f}, "
          f"cap-gap exponent {gaps.exponent:.3f}")
    _write_meta(out, "residuals", args, cfg, {
        "residual_exponent": res.exponent, "gap_exponent": gaps.exponent})
    return 0


COMMANDS = {
    "synth-wavelet": cmd_synth_wavelet,
    "chi": cmd_chi,
    "cap-verify": cmd_cap_verify,
    "curve-verify": cmd_curve_verify,
    "edge-map": cmd_edge_map,
    "residuals": cmd_residuals,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="sphere-edgelab",
        description="Directional wavelet analysis of edges on the sphere")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", default=None, help="JSON run config")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker cap for independent studies")
    parser.add_argument("--seed", type=int, default=0,
                        help="recorded in run metadata")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](args, cfg)
    except PreconditionError as exc:
        print(f"precondition error: {exc}", file=sys.stderr)
        return 3
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:                       # jsonschema and friends
        if jsonschema is not None and isinstance(exc, jsonschema.ValidationError):
            print(f"config validation error: {exc.message}", file=sys.stderr)
            return 2
        raise


if __name__ == "__main__":
    sys.exit(main())
