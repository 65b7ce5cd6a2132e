"""Command-line experiments over the weighted-projection pipeline.

Five subcommands, each writing machine-readable CSV/JSON (atomically, 17
significant digits) plus rendered figures into --out. Exit code 0 means
every internal invariant check passed; 1 means a check failed (details in
the JSON); 2 means unusable flags or inputs.

Heavy imports happen inside the handlers so thread caps (UGWB_THREADS) are
in place before the numerics load.
"""

import argparse
import json
import math
import os
import sys
import tempfile

__all__ = ["main"]


class _UsageError(Exception):
    pass


def _configure_runtime():
    threads = os.environ.get("UGWB_THREADS")
    if threads:
        for var in (
            "OMP_NUM_THREADS",
            "OPENBLAS_NUM_THREADS",
            "MKL_NUM_THREADS",
            "NUMEXPR_NUM_THREADS",
        ):
            os.environ.setdefault(var, threads)
    os.environ.setdefault("MPLBACKEND", "Agg")


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_atomic(path, text):
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    _write_atomic(path, "\n".join(lines) + "\n")


def _json_ready(obj):
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    if hasattr(obj, "item") and not hasattr(obj, "__len__"):  # numpy scalar
        return _json_ready(obj.item())
    return obj


def _write_json(path, obj):
    _write_atomic(path, json.dumps(_json_ready(obj), indent=2, sort_keys=True) + "\n")


def _plot_atomic(render, path, *args, **kwargs):
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".png")
    os.close(fd)
    try:
        render(tmp, *args, **kwargs)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _outdir(args):
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _finish(path_json, report, checks):
    report["checks"] = checks
    failed = sorted(name for name, ok in checks.items() if not ok)
    report["failed_checks"] = failed
    report["passes"] = not failed
    _write_json(path_json, report)
    return 0 if not failed else 1


# ---------------------------------------------------------------- commands


def _cmd_landau_spectrum(args):
    import numpy as np

    from . import plotting
    from .landau import (
        lambda_bounds_n0,
        lambda_nk,
        mean_radius_from_lambda,
        radius_bracket_n0,
        radius_from_lambda,
    )

    out = _outdir(args)
    if args.k_max < 0:
        raise _UsageError("--k-max must be nonnegative")
    rows = []
    clamped_any = False
    import warnings

    from .errors import RadiusClampWarning

    for k in range(-args.n, args.k_max + 1):
        lam = lambda_nk(args.n, k, args.q, args.b, tol=args.tol)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", RadiusClampWarning)
            radius = radius_from_lambda(lam, args.q)
        clamped_any |= bool(caught)
        if args.n == 0:
            lo, hi = lambda_bounds_n0(k, args.q, args.b)
            _, mr_hi = radius_bracket_n0(k, args.q, args.b)
            r_hi = math.sqrt(max(mr_hi * mr_hi - 1.0, 0.0))
        else:
            lo = hi = r_hi = math.nan
        rows.append((k, lam, lo, hi, radius, r_hi))

    checks = {}
    if args.n == 0:
        lams = [r[1] for r in rows]
        checks["bracket_strict"] = all(r[2] < r[1] < r[3] for r in rows)
        checks["lambda_decreasing"] = all(a > b for a, b in zip(lams, lams[1:]))
        checks["radius_below_bracket"] = all(r[4] <= r[5] + 1e-12 for r in rows)
    checks["mean_radius_consistent"] = all(
        abs(mean_radius_from_lambda(r[1], args.q) - math.hypot(1.0, r[4])) < 1e-9
        or r[4] == 0.0
        for r in rows
    )

    csv_path = os.path.join(out, "landau_spectrum.csv")
    _write_csv(csv_path, ["k", "lambda", "lower", "upper", "radius", "radius_upper"], rows)
    if not args.no_plot:
        ks = np.array([r[0] for r in rows])
        lams = np.array([r[1] for r in rows])
        lo = np.array([r[2] for r in rows])
        hi = np.array([r[3] for r in rows])
        _plot_atomic(
            plotting.save_spectrum_plot, os.path.join(out, "landau_spectrum.png"), ks, lams, lo, hi
        )
    report = {
        "command": "landau-spectrum",
        "params": {"b": args.b, "q": args.q, "n": args.n, "k_max": args.k_max, "tol": args.tol},
        "rows": [
            dict(zip(["k", "lambda", "lower", "upper", "radius", "radius_upper"], r)) for r in rows
        ],
        "any_radius_clamped": clamped_any,
    }
    return _finish(os.path.join(out, "landau_spectrum.json"), report, checks)


def _default_floor(q, half_width):
    # weight level of a shell two units inside the boundary: levels beyond it
    # are box artifacts, not resolvable concentration shells
    from .special_functions import jbracket

    return math.exp(-q * jbracket(max(half_width - 2.0, 0.0)))


def _cmd_landau_validate(args):
    import numpy as np

    from . import plotting
    from .landau import lambda_nk, landau_basis
    from .operator_core import (
        GridSpec,
        KernelProjection,
        build_ugwb,
        check_localization_function,
        check_ugwb,
        exponential_weight,
        localization_integral,
        recommended_half_width,
    )
    from .special_functions import jbracket

    out = _outdir(args)
    try:
        grid = GridSpec(dim=2, half_width=args.half_width, points_per_axis=args.grid)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    pts = grid.points()
    w = grid.weight

    ncols = args.n + args.k_max + 1
    phi = np.empty((grid.total_points, ncols), dtype=complex)
    for idx, k in enumerate(range(-args.n, args.k_max + 1)):
        phi[:, idx] = landau_basis(args.n, k, args.b, pts)

    gram = phi.conj().T @ phi * w
    gram_residual = float(np.abs(gram - np.eye(ncols)).max())

    f_vals = np.exp(-args.q * jbracket(grid.radii()))
    toeplitz = phi.conj().T @ (f_vals[:, None] * phi) * w
    off = toeplitz - np.diag(np.diag(toeplitz))
    toeplitz_offdiag = float(np.abs(off).max())

    lam_radial = np.array(
        [lambda_nk(args.n, k, args.q, args.b, tol=args.tol) for k in range(-args.n, args.k_max + 1)]
    )
    toeplitz_diag_err = float(
        np.max(np.abs(np.real(np.diag(toeplitz)) - lam_radial) / lam_radial)
    )

    p = KernelProjection(kernel=phi @ phi.conj().T, grid=grid)
    del phi
    floor = args.floor if args.floor is not None else _default_floor(args.q, args.half_width)
    u = build_ugwb(p, args.q, rel_tol=args.rel_tol, floor=floor)
    ucheck = check_ugwb(u, p)

    lam_sorted = np.sort(lam_radial)[::-1]
    n_cmp = min(len(u.levels), len(lam_sorted))
    rel_errors = [
        abs(u.levels[i].lam - lam_sorted[i]) / lam_sorted[i] for i in range(n_cmp)
    ]
    loc_ints = []
    for lv in u.levels:
        loc_ints.append(
            max(
                localization_integral(lv.vectors[:, c], lv.radius, args.q, grid)
                for c in range(lv.multiplicity)
            )
        )

    gcheck = check_localization_function(exponential_weight(args.q), seed=args.seed)
    r_max = float(u.radii().max()) if u.levels else 0.0
    recommended = recommended_half_width(args.q, r_max, floor)

    checks = {
        "gram_orthonormal": gram_residual <= 1e-5,
        "toeplitz_diagonal": toeplitz_offdiag <= 1e-8,
        "eigenvalues_match_radial": bool(n_cmp) and max(rel_errors[: min(6, n_cmp)]) <= 2e-2,
        "localization_bounded": ucheck["localization_bounded"],
        "norm_identity": ucheck["norm_identity_defect"] <= 1e-3,
        "weight_function_valid": gcheck["triangle_ok"] and gcheck["min_value"] >= 1.0 - 1e-12,
        "ugwb_invariants": ucheck["passes"],
    }
    rows = [
        (
            i,
            lam_sorted[i],
            u.levels[i].lam,
            rel_errors[i],
            u.levels[i].radius,
            loc_ints[i],
        )
        for i in range(n_cmp)
    ]
    csv_path = os.path.join(out, "landau_validate.csv")
    _write_csv(
        csv_path,
        ["level", "lambda_radial", "lambda_grid", "rel_err", "radius", "loc_integral"],
        rows,
    )
    if not args.no_plot:
        _plot_atomic(
            plotting.save_validate_plot,
            os.path.join(out, "landau_validate.png"),
            np.array(rel_errors),
            np.array(loc_ints),
            u.m_bound,
        )
    report = {
        "command": "landau-validate",
        "params": {
            "b": args.b,
            "q": args.q,
            "n": args.n,
            "k_max": args.k_max,
            "grid": args.grid,
            "half_width": args.half_width,
            "floor": floor,
            "rel_tol": args.rel_tol,
            "tol": args.tol,
        },
        "gram_residual": gram_residual,
        "toeplitz_offdiag_max": toeplitz_offdiag,
        "toeplitz_diag_rel_err": toeplitz_diag_err,
        "rel_errors": rel_errors,
        "loc_integrals": loc_ints,
        "m_bound": u.m_bound,
        "n_levels": len(u.levels),
        "ugwb_report": {k: v for k, v in ucheck.items()},
        "weight_check": gcheck,
        "recommended_half_width": recommended,
        "half_width_advisory_ok": args.half_width >= recommended,
    }
    return _finish(os.path.join(out, "landau_validate.json"), report, checks)


def _cmd_ugwb(args):
    from . import plotting
    from .kernel_io import read_kernel
    from .operator_core import build_ugwb, check_ugwb, verify_projection

    out = _outdir(args)
    try:
        p = read_kernel(args.input)
    except (OSError, ValueError) as exc:
        raise _UsageError(str(exc)) from exc
    u = build_ugwb(p, args.q, rel_tol=args.rel_tol, floor=args.floor)
    ucheck = check_ugwb(u, p)
    vcheck = verify_projection(p)

    rows = [
        (i, lv.lam, lv.multiplicity, lv.radius, lv.mean_radius, int(lv.clamped))
        for i, lv in enumerate(u.levels)
    ]
    _write_csv(
        os.path.join(out, "ugwb_levels.csv"),
        ["level", "lambda", "multiplicity", "radius", "mean_radius", "clamped"],
        rows,
    )
    if not args.no_plot:
        _plot_atomic(
            plotting.save_levels_plot,
            os.path.join(out, "ugwb.png"),
            u.lambdas(),
            u.radii(),
        )
    checks = {
        "input_is_projection": vcheck["passes"],
        "ugwb_invariants": ucheck["passes"],
    }
    report = {
        "command": "ugwb",
        "params": {"input": args.input, "q": args.q, "rel_tol": args.rel_tol, "floor": args.floor},
        "n_levels": len(u.levels),
        "m_bound": u.m_bound,
        "overflow": u.overflow,
        "levels": [
            {
                "lambda": lv.lam,
                "multiplicity": lv.multiplicity,
                "radius": lv.radius,
                "mean_radius": lv.mean_radius,
                "clamped": lv.clamped,
            }
            for lv in u.levels
        ],
        "ugwb_report": ucheck,
        "projection_report": vcheck,
    }
    return _finish(os.path.join(out, "ugwb.json"), report, checks)


def _cmd_hofstadter(args):
    import numpy as np

    from . import plotting
    from .discrete_models import (
        LatticeModel,
        auto_lowest_window,
        chern_marker,
        decay_profile,
        hofstadter_hamiltonian,
        kernel_decay_fit,
        marker_bulk_average,
        spectral_projection,
    )
    from .errors import DegenerateFit, WindowTouchesSpectrum
    from .kernel_io import write_kernel
    from .operator_core import verify_projection

    out = _outdir(args)
    try:
        model = LatticeModel(
            size=args.size, flux_p=args.flux[0], flux_q=args.flux[1], boundary=args.boundary
        )
        h = hofstadter_hamiltonian(model)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    evals = np.linalg.eigvalsh(h)

    if args.window == "auto-lowest":
        window = auto_lowest_window(evals)
    else:
        window = args.window
    try:
        p = spectral_projection(h, window)
    except WindowTouchesSpectrum as exc:
        raise _UsageError(str(exc)) from exc

    below = evals[evals < window[1]]
    above = evals[evals > window[1]]
    gap = float(above.min() - below.max()) if below.size and above.size else math.inf

    periodic = args.boundary == "periodic"
    distances, log_max = decay_profile(p, periodic=periodic)
    try:
        fit = kernel_decay_fit(p, periodic=periodic)
    except DegenerateFit as exc:
        raise _UsageError(str(exc)) from exc

    marker_bulk = None
    if args.boundary == "open" and model.size >= 18:
        field = chern_marker(p, model)
        marker_bulk = marker_bulk_average(field)
        if not args.no_plot:
            _plot_atomic(plotting.save_marker_plot, os.path.join(out, "hofstadter_marker.png"), field)

    vcheck = verify_projection(p, tol=1e-10)
    trace = p.trace()
    kernel_path = os.path.join(out, "hofstadter.ugwk")
    write_kernel(p, kernel_path)

    _write_csv(
        os.path.join(out, "hofstadter_decay.csv"),
        ["distance", "log_max_abs"],
        list(zip(distances.tolist(), log_max.tolist())),
    )
    if not args.no_plot:
        _plot_atomic(
            plotting.save_decay_plot,
            os.path.join(out, "hofstadter_decay.png"),
            distances,
            log_max,
            fit.c,
            fit.beta,
            fit.r_squared,
        )

    checks = {
        "projection_exact": vcheck["passes"],
        "trace_integral": abs(trace - round(trace)) <= 1e-6,
        "decay_fit_positive": fit.beta > 0,
        "decay_fit_unflagged": not fit.flagged,
    }
    report = {
        "command": "hofstadter",
        "params": {
            "flux": f"{model.flux_p}/{model.flux_q}",
            "size": model.size,
            "boundary": model.boundary,
            "window": list(window),
        },
        "gap": gap,
        "n_states": int(round(trace)),
        "trace": trace,
        "decay": {
            "c": fit.c,
            "beta": fit.beta,
            "r_squared": fit.r_squared,
            "flagged": fit.flagged,
        },
        "marker_bulk_average": marker_bulk,
        "kernel_file": kernel_path,
        "projection_report": vcheck,
    }
    return _finish(os.path.join(out, "hofstadter.json"), report, checks)


def _cmd_trace_density(args):
    import numpy as np

    from . import plotting
    from .analysis import prop24_diagnostic, trace_per_unit_volume
    from .errors import BoxExceedsGrid
    from .kernel_io import read_kernel
    from .operator_core import build_ugwb

    out = _outdir(args)
    try:
        p = read_kernel(args.input)
    except (OSError, ValueError) as exc:
        raise _UsageError(str(exc)) from exc
    if len(args.boxes) < 3:
        raise _UsageError("--boxes needs at least three half-widths for extrapolation")
    try:
        seq = trace_per_unit_volume(p, args.boxes)
    except (BoxExceedsGrid, ValueError) as exc:
        raise _UsageError(str(exc)) from exc

    evals_scale = float(np.abs(np.diag(p.kernel)).max())
    u = build_ugwb(p, args.q, rel_tol=args.rel_tol, floor=args.floor)
    if args.floor is None and u.levels:
        # default to a roundoff-safe relative floor: levels below 1e-6 of the
        # top are eigensolver debris on exact lattice projections
        import dataclasses

        cut = 1e-6 * u.levels[0].lam
        u = dataclasses.replace(u, levels=[lv for lv in u.levels if lv.lam > cut])
    verdict = prop24_diagnostic(u, seq)

    masses = [v * (2.0 * l) ** p.grid.dim for l, v in seq]
    monotone = all(b >= a - 1e-9 * max(1.0, abs(a)) for a, b in zip(masses, masses[1:]))

    _write_csv(os.path.join(out, "trace_density.csv"), ["L", "value"], seq)
    if not args.no_plot:
        ls = [l for l, _ in seq]
        vals = [v for _, v in seq]
        _plot_atomic(
            plotting.save_trace_plot,
            os.path.join(out, "trace_density.png"),
            ls,
            vals,
            verdict.limit,
        )
    checks = {
        "trace_monotone": monotone,
        "diagnostic_consistent": verdict.verdict == "CONSISTENT",
    }
    report = {
        "command": "trace-density",
        "params": {
            "input": args.input,
            "boxes": list(args.boxes),
            "q": args.q,
            "rel_tol": args.rel_tol,
            "floor": args.floor,
        },
        "rows": [{"L": l, "value": v} for l, v in seq],
        "kernel_diag_max": evals_scale,
        "diagnostic": {
            "m_star": verdict.m_star,
            "min_gap": verdict.min_gap,
            "min_gap_resolved": verdict.min_gap_resolved,
            "limit": verdict.limit,
            "limit_positive": verdict.limit_positive,
            "verdict": verdict.verdict,
        },
    }
    return _finish(os.path.join(out, "trace_density.json"), report, checks)


# ---------------------------------------------------------------- parser


def _parse_flux(text):
    try:
        if "/" in text:
            num, den = text.split("/", 1)
            p, q = int(num), int(den)
        else:
            p, q = int(text), 1
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"flux must look like p/q, got {text!r}") from exc
    return p, q


def _parse_window(text):
    if text == "auto-lowest":
        return text
    try:
        lo, hi = (float(part) for part in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"window must be lo,hi or auto-lowest, got {text!r}") from exc
    return (lo, hi)


def _parse_boxes(text):
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"boxes must be comma-separated reals, got {text!r}") from exc


def _add_common(sub):
    sub.add_argument("--seed", type=int, default=0, help="seed for sampled checks")
    sub.add_argument("--out", default=".", help="output directory")
    sub.add_argument("--no-plot", action="store_true", help="skip figure rendering")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="ugwb", description="Weighted-projection eigenbases and their diagnostics"
    )
    sub = parser.add_subparsers(dest="command", metavar="command")

    sp = sub.add_parser("landau-spectrum", help="exact level weights and radius brackets")
    sp.add_argument("--b", type=float, required=True, help="field strength")
    sp.add_argument("--q", type=float, required=True, help="weight rate")
    sp.add_argument("--n", type=int, default=0, help="level index")
    sp.add_argument("--k-max", type=int, required=True, help="largest angular index")
    sp.add_argument("--tol", type=float, default=1e-10, help="quadrature tolerance")
    _add_common(sp)
    sp.set_defaults(handler=_cmd_landau_spectrum)

    sp = sub.add_parser("landau-validate", help="grid pipeline against radial analytics")
    sp.add_argument("--b", type=float, required=True)
    sp.add_argument("--q", type=float, required=True)
    sp.add_argument("--n", type=int, default=0)
    sp.add_argument("--k-max", type=int, required=True)
    sp.add_argument("--grid", type=int, required=True, help="points per axis")
    sp.add_argument("--half-width", type=float, required=True, help="box half-width")
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--rel-tol", type=float, default=1e-6, help="degeneracy grouping tolerance")
    sp.add_argument("--floor", type=float, default=None, help="eigenvalue floor (default: boundary weight level)")
    _add_common(sp)
    sp.set_defaults(handler=_cmd_landau_validate)

    sp = sub.add_parser("ugwb", help="build the weighted eigenbasis from a kernel file")
    sp.add_argument("--input", required=True, help="kernel file")
    sp.add_argument("--q", type=float, required=True)
    sp.add_argument("--rel-tol", type=float, default=1e-6)
    sp.add_argument("--floor", type=float, default=None)
    _add_common(sp)
    sp.set_defaults(handler=_cmd_ugwb)

    sp = sub.add_parser("hofstadter", help="magnetic lattice projection with decay and marker")
    sp.add_argument("--flux", type=_parse_flux, required=True, help="flux per plaquette, p/q")
    sp.add_argument("--size", type=int, required=True, help="lattice size N")
    sp.add_argument("--boundary", choices=("open", "periodic"), default="open")
    sp.add_argument("--window", type=_parse_window, default="auto-lowest", help="lo,hi or auto-lowest")
    _add_common(sp)
    sp.set_defaults(handler=_cmd_hofstadter)

    sp = sub.add_parser("trace-density", help="trace per unit volume and its verdict")
    sp.add_argument("--input", required=True, help="kernel file")
    sp.add_argument("--boxes", type=_parse_boxes, required=True, help="box half-widths L1,L2,...")
    sp.add_argument("--q", type=float, default=0.25, help="weight rate for the basis build")
    sp.add_argument("--rel-tol", type=float, default=1e-6)
    sp.add_argument("--floor", type=float, default=None)
    _add_common(sp)
    sp.set_defaults(handler=_cmd_trace_density)

    return parser


def main(argv=None):
    _configure_runtime()
    parser = _build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "handler"):
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.handler(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
