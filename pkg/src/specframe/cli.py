"""Command-line entry point: ``specframe <command> --config run.yaml``.

Exit status: 0 pass, 1 failed verdict, 2 configuration error, 3 numeric
warning with ``--strict``.
"""
import argparse
import csv
import json
import os
import sys
import warnings

import numpy as np

from . import __version__
from .config import (
    COMMANDS,
    CONVENTIONS,
    build_run,
    load_document,
    number,
    parse_filter,
    parse_function,
    parse_functions,
    positive,
    require,
)
from .dilation import (
    METHODS,
    OnbConfig,
    fiber_frame_bounds,
    fiber_matrix,
    omega_grid,
    sigma_residuals,
    tight_residual,
)
from .errors import ConfigError, DegenerateSupportError, InvalidArgument, NumericWarning
from .extension import MaskFamily, ThetaSymbol, dual_oep_verify, dual_pair_identity_check, oep_verify, uep_verify
from .fiber import export_fibers_csv, uniform_grid
from .frames import (
    WaveletSystemSpec,
    analysis,
    frame_apply,
    frame_bounds,
    quasi_affine,
    random_probes,
    reconstruct,
)
from .signals import linear_combination, translate

SCHEMA_VERSION = 1
EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if np.isfinite(obj) else repr(float(obj))
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _trig_rows(poly):
    return [
        [int(poly.kmin + i), float(c.real), float(c.imag)]
        for i, c in enumerate(poly.coeffs)
    ]


# ----------------------------------------------------------------------
# config pieces


def _family(run, key="family", grid=None):
    doc = require(run.raw, key, "")
    grid = uniform_grid(run.grid) if grid is None else grid
    if "psis" in doc:
        phi = parse_function(require(doc, "phi", key), f"{key}.phi")
        psis = parse_functions(doc["psis"], f"{key}.psis")
        return MaskFamily.from_functions(phi, psis, grid, run.K, run.convention)
    ref = parse_filter(require(doc, "refinement", key), f"{key}.refinement")
    wl = doc.get("wavelets", [])
    if not isinstance(wl, list):
        raise ConfigError(f"{key}.wavelets", "expected a list of filters")
    wavelets = [parse_filter(w, f"{key}.wavelets[{i}]") for i, w in enumerate(wl)]
    phi = parse_function(doc["phi"], f"{key}.phi") if "phi" in doc else None
    return MaskFamily.from_taps(ref, wavelets, grid, run.convention, phi=phi)


def _theta(run, grid, default=None):
    spec = run.raw.get("theta", default)
    if spec is None:
        return None
    if isinstance(spec, (int, float, str)) and not isinstance(spec, bool):
        return ThetaSymbol.constant(positive(spec, "theta") if spec != 0 else 0.0, grid)
    if isinstance(spec, dict) and "constant" in spec:
        return ThetaSymbol.constant(number(spec["constant"], "theta.constant"), grid)
    f = parse_filter(spec, "theta")
    return ThetaSymbol.from_trig(f, grid, label=f"taps offset {f['offset']}")


def _generators(run):
    if "generators" in run.raw:
        gens = parse_functions(run.raw["generators"], "generators")
    elif "family" in run.raw:
        fam = _family(run)
        gens = list(fam.psis)
        if not gens and fam.wavelets:
            raise ConfigError("family.phi", "needed to synthesize the wavelet generators")
    else:
        raise ConfigError("generators", "missing required field")
    return gens


def _window(run):
    w = run.raw.get("window", [-2.0, 2.0])
    if not isinstance(w, list) or len(w) != 2:
        raise ConfigError("window", "expected [lo, hi]")
    lo, hi = number(w[0], "window[0]"), number(w[1], "window[1]")
    if not lo < hi:
        raise ConfigError("window", "needs lo < hi")
    return (lo, hi)


def _probe_opts(run, key="probes", count=32):
    spec = run.raw.get(key, {}) or {}
    if not isinstance(spec, dict):
        raise ConfigError(key, "expected {count, seed}")
    n = positive(spec.get("count", count), f"{key}.count", int)
    seed = spec.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"{key}.seed", "expected a nonnegative integer")
    return n, seed


def _method(run):
    m = run.raw.get("method", "alpha")
    if m not in METHODS:
        raise ConfigError("method", f"must be one of {METHODS}")
    return m


# ----------------------------------------------------------------------
# commands


def cmd_verify_uep(run, out):
    fam = _family(run)
    tol = run.tol if run.tol is not None else 1e-12
    rep = uep_verify(fam, tol=tol)
    masks = []
    for idx, sym in enumerate(fam.symbols):
        if sym.exact is not None:
            rows = _trig_rows(sym.exact)
            masks.append({"index": idx, "kmin": int(sym.exact.kmin), "rows": rows})
            if out:
                _write_rows(os.path.join(out, f"mask_{idx}.csv"), ["k", "re", "im"], rows)
    return rep.verdict, {"uep": rep.as_dict(), "masks": masks}


def cmd_verify_oep(run, out):
    grid = uniform_grid(run.grid)
    fam = _family(run, grid=grid)
    theta = _theta(run, grid, default=1.0)
    tol = run.tol if run.tol is not None else 1e-12
    rep = oep_verify(fam, theta, tol=tol, K=run.K)
    return rep.verdict, {"oep": rep.as_dict(), "theta": theta.label}


def cmd_dual_oep(run, out):
    grid = uniform_grid(run.grid)
    fam = _family(run, grid=grid)
    dual = _family(run, "dual_family", grid=grid)
    theta = _theta(run, grid)
    phi_masks = dual_masks = None
    if theta is None:
        pm = run.raw.get("phi_masks")
        dm = run.raw.get("dual_phi_masks")
        if pm is None or dm is None:
            raise ConfigError("theta", "missing: give theta or phi_masks and dual_phi_masks")
        phi_masks = [MaskFamily.from_taps(parse_filter(f, f"phi_masks[{i}]"), [], grid, run.convention).refinement for i, f in enumerate(pm)]
        dual_masks = [MaskFamily.from_taps(parse_filter(f, f"dual_phi_masks[{i}]"), [], grid, run.convention).refinement for i, f in enumerate(dm)]
    default_rhs = 2.0 if run.convention == "paper" else 1.0
    rhs = positive(run.raw.get("rhs_factor", default_rhs), "rhs_factor")
    tol = run.tol if run.tol is not None else 1e-12
    pairs = []
    if fam.phi is not None and dual.phi is not None:
        pairs.append((fam.phi, dual.phi))
    rep = dual_oep_verify(
        fam, dual, theta, tol=tol, rhs_factor=rhs, phi_masks=phi_masks, dual_phi_masks=dual_masks, bounded_pairs=pairs
    )
    return rep.verdict, {"dual_oep": rep.as_dict()}


def cmd_dual_pair(run, out):
    doc = run.raw
    Phi = parse_functions(require(doc, "Phi", ""), "Phi")
    Psi = parse_functions(doc.get("Psi", []), "Psi")
    Phi_t = parse_functions(doc.get("Phi_dual", doc["Phi"]), "Phi_dual")
    Psi_t = parse_functions(doc.get("Psi_dual", doc.get("Psi", [])), "Psi_dual")
    n, seed = _probe_opts(run, "tests", 16)
    tests = random_probes(_window(run), n, seed)
    levels = doc.get("levels", [0, 2, 4, 6])
    if not isinstance(levels, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in levels):
        raise ConfigError("levels", "expected a list of integers")
    J = doc.get("level", 0)
    if isinstance(J, bool) or not isinstance(J, int):
        raise ConfigError("level", "expected an integer")
    tol = run.tol if run.tol is not None else 1e-10
    rep = dual_pair_identity_check(Phi, Psi, Phi_t, Psi_t, tests, J=J, levels=tuple(levels), tol=tol)
    return rep.verdict, {"dual_pair": rep.as_dict(), "tests": {"count": n, "seed": seed, "window": list(_window(run))}}


def cmd_fiber(run, out):
    gens = _generators(run)
    cfg = OnbConfig.radius(run.trunc)
    method = _method(run)
    B = float(run.raw.get("B", 1.0))
    nom = positive(run.raw.get("omegas", 64), "omegas", int)
    tol = run.tol if run.tol is not None else 0.05
    fm = fiber_matrix(gens, cfg, method=method)
    om = omega_grid(nom)
    res = tight_residual(gens, B, om, fm=fm)
    d0, rest = sigma_residuals(fm, B)
    fb = fiber_frame_bounds(gens, om, fm=fm)
    herm = fm.hermitian_defect()
    if out:
        fm.to_csv(os.path.join(out, "fiber_matrix.csv"))
        for i, g in enumerate(gens):
            export_fibers_csv(g, uniform_grid(run.grid), run.K, os.path.join(out, f"fibers_{i}.csv"))
    for w in fm.warnings:
        warnings.warn(w, NumericWarning, stacklevel=2)
    body = {
        "method": method,
        "onb": cfg.as_dict(),
        "B": B,
        "omegas": nom,
        "tight_residual": res,
        "sigma_residuals": {"diagonal": d0, "off_sigma": rest},
        "hermitian_defect": herm,
        "fiber_bounds": {"upper": fb.upper, "lower": fb.lower},
        "psi_tails": list(fm.psi_tails),
    }
    return res < tol and herm < tol, {"fiber": body}


def _system(run, gens):
    return WaveletSystemSpec(tuple(gens), run.J, _window(run))


def cmd_bounds(run, out):
    spec = _system(run, _generators(run))
    n, seed = _probe_opts(run)
    probes = random_probes(spec.window, n, seed)
    rep = frame_bounds(spec, probes, seed=seed)
    expect = run.raw.get("expect")
    ok = bool(np.isfinite(rep.A) and rep.A > 0)
    if expect is not None:
        if not isinstance(expect, list) or len(expect) != 2:
            raise ConfigError("expect", "expected [lo, hi]")
        ok = ok and expect[0] <= rep.A and rep.B <= expect[1]
    if out:
        analysis(probes[0], spec).to_csv(os.path.join(out, "coefficients.csv"))
    return ok, {"bounds": rep.as_dict(), "system": spec.describe(), "expect": expect}


def _reconstruct_input(run, spec):
    src = run.raw.get("input", {"type": "span"})
    if isinstance(src, dict) and src.get("type") == "span":
        at = spec.atoms
        lo, hi = spec.window
        c, r = 0.5 * (lo + hi), 0.25 * (hi - lo)
        scales = src.get("scales", [0, 3])
        seed = src.get("seed", 0)
        idx = [
            i
            for i in range(len(at))
            if scales[0] <= at.scale[i] <= scales[1]
            and at.funcs[i].support[0] >= c - r
            and at.funcs[i].support[1] <= c + r
        ]
        if not idx:
            raise ConfigError("input.scales", "no atoms of these scales fit the central half of the window")
        rng = np.random.default_rng(seed)
        return linear_combination([at.funcs[i] * at.weight[i] for i in idx], rng.standard_normal(len(idx))), {
            "type": "span",
            "scales": list(scales),
            "seed": seed,
            "atoms": len(idx),
        }
    return parse_function(src, "input"), src


def cmd_reconstruct(run, out):
    spec = _system(run, _generators(run))
    f, desc = _reconstruct_input(run, spec)
    tol = run.tol if run.tol is not None else 1e-10
    route = run.raw.get("route", "dual")
    B = None
    if route == "tight":
        B = run.raw.get("B", "bounds")
        if B == "bounds":
            n, seed = _probe_opts(run)
            B = frame_bounds(spec, random_probes(spec.window, n, seed), seed=seed).B
        B = positive(B, "B")
    elif route != "dual":
        raise ConfigError("route", "must be 'dual' or 'tight'")
    res = reconstruct(f, spec, tol=min(tol, 1e-10), B=B)
    if out:
        analysis(f, spec).to_csv(os.path.join(out, "coefficients.csv"))
    body = {
        "route": res.method,
        "B": B,
        "relative_error": res.relative_error,
        "cg_iterations": res.iterations,
        "input": desc,
        "system": spec.describe(),
    }
    return res.relative_error < tol, {"reconstruct": body}


def cmd_quasi_affine(run, out):
    spec = _system(run, _generators(run))
    qspec = quasi_affine(spec)
    n, seed = _probe_opts(run)
    probes = random_probes(spec.window, n, seed)
    a = frame_bounds(spec, probes, seed=seed)
    q = frame_bounds(qspec, probes, seed=seed)
    diff = max(abs(a.A - q.A), abs(a.B - q.B))
    comm = commutation_residual(qspec, probes)
    tol = run.tol if run.tol is not None else 0.05
    body = {
        "affine": a.as_dict(),
        "quasi_affine": q.as_dict(),
        "max_bound_difference": diff,
        "translation_commutator": comm,
        "system": spec.describe(),
    }
    return diff <= tol and comm <= 1e-10, {"quasi_affine": body}


def commutation_residual(spec, probes, shift=1.0):
    """``max ||S T f - T S f|| / ||f||`` over probes that stay inside the window."""
    lo, hi = spec.window
    worst = 0.0
    for f in probes:
        a, b = f.support
        if a + shift < lo or b + shift > hi:
            continue
        lhs = frame_apply(translate(f, shift), spec)
        rhs = translate(frame_apply(f, spec), shift)
        worst = max(worst, (lhs - rhs).norm() / f.norm())
    return worst


HANDLERS = {
    "verify-uep": cmd_verify_uep,
    "verify-oep": cmd_verify_oep,
    "dual-oep": cmd_dual_oep,
    "dual-pair": cmd_dual_pair,
    "fiber": cmd_fiber,
    "bounds": cmd_bounds,
    "reconstruct": cmd_reconstruct,
    "quasi-affine-compare": cmd_quasi_affine,
}


def make_parser():
    p = argparse.ArgumentParser(prog="specframe", description="Wavelet frame verification runs.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", metavar="PATH", help="YAML run configuration")
    p.add_argument("--out", metavar="DIR", help="directory for report.json and CSV side files")
    p.add_argument("--grid", type=int, metavar="N", help="frequency grid size")
    p.add_argument("--trunc", type=int, metavar="R", help="truncation radius (fiber) and scale range J (frame engine)")
    p.add_argument("--convention", choices=CONVENTIONS, help="mask normalization")
    p.add_argument("--tol", type=float, metavar="X", help="verdict tolerance")
    p.add_argument("--strict", action="store_true", help="exit 3 when a numeric warning was raised")
    return p


def run_command(command, doc, overrides, out=None):
    """Execute one command; returns ``(exit_code, report_dict)``."""
    run = build_run(command, doc, overrides)
    if overrides.get("trunc") is not None:
        run.J = run.trunc
    if out:
        os.makedirs(out, exist_ok=True)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NumericWarning)
        verdict, body = HANDLERS[command](run, out)
    numeric = [str(w.message) for w in caught if issubclass(w.category, NumericWarning)]
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "verdict": bool(verdict),
        "convention": run.convention,
        "truncation": run.truncation(),
        "tolerance": run.tol,
        "numeric_warnings": numeric,
        "provenance": {"package_version": __version__, "parameters": doc, "overrides": {k: v for k, v in overrides.items() if v is not None}},
        "result": body,
    }
    if numeric and run.strict:
        code = EXIT_NUMERIC
    else:
        code = EXIT_PASS if verdict else EXIT_FAIL
    return code, _clean(report)


def main(argv=None):
    args = make_parser().parse_args(argv)
    overrides = {
        "grid": args.grid,
        "trunc": args.trunc,
        "convention": args.convention,
        "tol": args.tol,
        "strict": args.strict or None,
    }
    try:
        doc = load_document(args.config) if args.config else {}
        code, report = run_command(args.command, doc, overrides, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DegenerateSupportError, InvalidArgument) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = json.dumps(report, sort_keys=True, indent=2)
    if args.out:
        with open(os.path.join(args.out, "report.json"), "w") as fh:
            fh.write(text + "\n")
    print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
