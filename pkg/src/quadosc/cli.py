"""Command-line surface: gap, region, evolve, equivalence, selftest.

All rate parameters and reported rates are in units of mu^2 (the model
is computed at mu = 1 internally); the --mu flag rescales rate outputs
only.  Exit codes: 0 success, 1 invalid input, 2 numerical failure,
3 self-test failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .dynamics import (
    PositivityError,
    TruncationOverflowError,
    decay_rate,
    evolve,
    relaxation_norm,
    trace_distance,
)
from .model import ModelParams, TruncationSpec, invariant_diag
from .operators import DensityMatrix, build_operators, two_photon_check
from .reportio import (
    default_out_path,
    fmt_float,
    header_pairs,
    render_region_svg,
    write_csv,
    write_json,
)
from .selftest import run_acceptance
from .spectral import gap_report, region_boundary

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERICAL = 2
EXIT_SELFTEST = 3


def _add_model_args(p, nu_required=True):
    p.add_argument("--nu", type=float, required=nu_required, help="coupling ratio lambda/mu")
    p.add_argument("--r", type=float, default=None, help="representation parameter (> 0)")
    p.add_argument("--mu", type=float, default=1.0, help="rate scale; rescales outputs only")
    p.add_argument("--zeta-plus", type=float, default=0.0, help="Hamiltonian coefficient (mu^2 units)")
    p.add_argument("--zeta-minus", type=float, default=0.0, help="Hamiltonian coefficient (mu^2 units)")


def _add_io_args(p, default_format):
    p.add_argument("--format", choices=("csv", "json"), default=default_format)
    p.add_argument("--out", type=str, default=None, help="output path (default under $QUADOSC_OUT_DIR)")
    p.add_argument("--seed", type=int, default=0, help="recorded in output headers")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="quadosc",
        description="Quadratic open oscillator: truncated dynamics and spectral-gap analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gap = sub.add_parser("gap", help="full spectral-gap report at one parameter point")
    _add_model_args(p_gap)
    p_gap.add_argument("--dim", type=int, default=200)
    p_gap.add_argument("--m-max", type=int, default=6)
    p_gap.add_argument("--tail-tol", type=float, default=1e-6)
    _add_io_args(p_gap, "json")

    p_reg = sub.add_parser("region", help="regime-boundary curve over a nu grid")
    p_reg.add_argument("--nu-min", type=float, default=0.1)
    p_reg.add_argument("--nu-max", type=float, default=0.95)
    p_reg.add_argument("--steps", type=int, default=50)
    p_reg.add_argument("--tol", type=float, default=1e-10)
    p_reg.add_argument("--svg", action="store_true", help="also render a static SVG overlay")
    _add_io_args(p_reg, "csv")

    p_ev = sub.add_parser("evolve", help="integrate the predual equation and export the trajectory")
    _add_model_args(p_ev)
    p_ev.add_argument("--dim", type=int, default=60)
    p_ev.add_argument("--tail-tol", type=float, default=1e-6)
    p_ev.add_argument("--initial", type=str, default="basis:0",
                      help="basis:K | invariant | mixture:FILE (JSON {'weights': [...]})")
    p_ev.add_argument("--t", type=float, required=True, help="final time in 1/mu^2 units")
    p_ev.add_argument("--sample-every", type=float, default=None)
    p_ev.add_argument("--diag-cols", type=int, default=8)
    p_ev.add_argument("--allow-transient", action="store_true")
    _add_io_args(p_ev, "csv")

    p_eq = sub.add_parser("equivalence", help="two-photon restriction proportionality check")
    p_eq.add_argument("--parity", choices=("even", "odd"), required=True)
    _add_model_args(p_eq, nu_required=False)
    p_eq.add_argument("--xi-plus", type=float, default=None, help="defaults to --zeta-plus")
    p_eq.add_argument("--xi-minus", type=float, default=None, help="defaults to --zeta-minus")
    p_eq.add_argument("--dim", type=int, default=40)
    p_eq.add_argument("--tail-tol", type=float, default=1e-6)
    _add_io_args(p_eq, "json")

    p_st = sub.add_parser("selftest", help="run the acceptance suite")
    p_st.add_argument("--quick", action="store_true", help="skip the slow dynamics criteria")
    _add_io_args(p_st, "json")
    return parser


def _internal_params(args, r=None):
    r_val = args.r if r is None else r
    if r_val is None:
        raise ValueError("--r is required for this command")
    return ModelParams.from_nu(
        args.nu, r=r_val, mu=1.0, zeta_plus=args.zeta_plus, zeta_minus=args.zeta_minus
    )


def _resolve_out(args, default_name):
    return Path(args.out) if args.out else default_out_path(default_name)


def _kv_rows(payload):
    rows = []
    for key in sorted(payload):
        value = payload[key]
        if isinstance(value, (list, tuple, np.ndarray)):
            for i, v in enumerate(value):
                rows.append((f"{key}_{i}", v))
        elif value is None:
            rows.append((key, "nan"))
        else:
            rows.append((key, value))
    return rows


def cmd_gap(args):
    if args.nu >= 1.0:
        print(
            "error: no invariant state at nu >= 1 (transient regime); "
            "the gap analysis is undefined there",
            file=sys.stderr,
        )
        return EXIT_INVALID
    params = _internal_params(args)
    rep = gap_report(params, args.dim, m_max=args.m_max)
    mu2 = args.mu ** 2
    payload = {
        "nu": args.nu,
        "r": params.r,
        "mu": args.mu,
        "zeta_plus": args.zeta_plus,
        "zeta_minus": args.zeta_minus,
        "dim": args.dim,
        "m_max": args.m_max,
        "regime": rep.regime,
        "condition_value": rep.condition_value,
        "gap_value": None if rep.gap_value is None else rep.gap_value * mu2,
        "gap_interval_low": None if rep.gap_interval is None else rep.gap_interval[0] * mu2,
        "gap_interval_high": None if rep.gap_interval is None else rep.gap_interval[1] * mu2,
        "off_diag_gap": rep.off_diag_gap * mu2,
        "diagonal_lower": rep.diagonal_lower * mu2,
        "diagonal_numeric": rep.diagonal_numeric * mu2,
        "upper_linear": rep.upper_linear * mu2,
        "upper_lerch": rep.upper_lerch * mu2,
        "sector_minima_numeric": [v * mu2 for v in rep.sector_minima_numeric],
        "off_diag_analytic": [v * mu2 for v in rep.off_diag_analytic],
    }
    meta = header_pairs(
        "gap", args.seed, nu=args.nu, r=params.r, mu=args.mu,
        zeta_plus=args.zeta_plus, zeta_minus=args.zeta_minus,
        dim=args.dim, tail_tol=args.tail_tol,
    )
    out = _resolve_out(args, f"gap_report.{args.format}")
    if args.format == "json":
        write_json(out, meta, payload)
    else:
        write_csv(out, meta, ("key", "value"), _kv_rows(payload))
    if rep.regime == "exact-off-diagonal":
        print(f"regime: exact-off-diagonal; gap = {fmt_float(payload['gap_value'])}")
    else:
        print(
            "regime: undetermined; gap in "
            f"[{fmt_float(payload['gap_interval_low'])}, {fmt_float(payload['gap_interval_high'])}]"
        )
    print(f"condition value = {rep.condition_value:.6f}; report written to {out}")
    return EXIT_OK


def cmd_region(args):
    if not (0.0 < args.nu_min < args.nu_max <= 0.999):
        print("error: need 0 < nu-min < nu-max <= 0.999", file=sys.stderr)
        return EXIT_INVALID
    if args.steps < 2:
        print("error: need at least 2 grid steps", file=sys.stderr)
        return EXIT_INVALID
    grid = np.linspace(args.nu_min, args.nu_max, args.steps)
    rows = region_boundary(grid, tol=args.tol)
    meta = header_pairs(
        "region", args.seed, nu_min=args.nu_min, nu_max=args.nu_max,
        steps=args.steps, tol=args.tol,
    )
    out = _resolve_out(args, f"region_boundary.{args.format}")
    table = [
        (p.nu, p.r_star, p.r_sufficient, p.r_figure, p.condition_residual, p.status)
        for p in rows
    ]
    columns = ("nu", "r_star", "r_sufficient", "r_figure1", "condition_residual", "status")
    if args.format == "csv":
        write_csv(out, meta, columns, table)
    else:
        write_json(out, meta, {"columns": list(columns), "rows": [list(t) for t in table]})
    n_failed = sum(1 for p in rows if p.status == "failed")
    print(f"{len(rows)} grid points, {n_failed} failed; table written to {out}")
    if args.svg:
        svg_path = Path(out).with_suffix(".svg")
        render_region_svg(svg_path, rows)
        print(f"svg written to {svg_path}")
    return EXIT_OK


def _initial_state(spec, dim, params, allow_transient):
    if spec == "invariant":
        if params.nu >= 1.0:
            raise ValueError("invariant initial state requires nu < 1")
        return DensityMatrix.invariant(params, dim)
    if spec.startswith("basis:"):
        return DensityMatrix.basis(int(spec.split(":", 1)[1]), dim)
    if spec.startswith("mixture:"):
        path = spec.split(":", 1)[1]
        data = json.loads(Path(path).read_text())
        weights = np.asarray(data["weights"], dtype=float)
        if weights.ndim != 1 or weights.shape[0] > dim or np.any(weights < 0.0):
            raise ValueError("mixture weights must be a nonnegative vector of length <= dim")
        total = weights.sum()
        if total <= 0.0:
            raise ValueError("mixture weights must have positive total mass")
        p = np.zeros(dim)
        p[: weights.shape[0]] = weights / total
        return DensityMatrix.from_diagonal(p)
    raise ValueError(f"unknown initial-state spec {spec!r}")


def cmd_evolve(args):
    if args.nu >= 1.0 and not args.allow_transient:
        print(
            "error: nu >= 1 has no invariant state (transient regime); "
            "pass --allow-transient to integrate anyway",
            file=sys.stderr,
        )
        return EXIT_INVALID
    params = _internal_params(args)
    trunc = TruncationSpec(args.dim, tail_tol=args.tail_tol)
    opset = build_operators(params, trunc)
    rho0 = _initial_state(args.initial, args.dim, params, args.allow_transient)
    traj = evolve(opset, rho0, args.t, sample_every=args.sample_every)

    have_reference = params.nu < 1.0
    if have_reference:
        pi = invariant_diag(params.nu, args.dim)
        reference = DensityMatrix.invariant(params, args.dim)
        distances = [trace_distance(s, reference) for s in traj.states]
        norms = [relaxation_norm(s, reference, pi) for s in traj.states]
    else:
        distances = [float("nan")] * len(traj.states)
        norms = [float("nan")] * len(traj.states)

    k = max(0, min(args.diag_cols, args.dim))
    columns = ["t", "trace_distance", "weighted_hs_norm", "boundary_occupancy"]
    columns += [f"diag_{i}" for i in range(k)]
    rows = []
    for i, state in enumerate(traj.states):
        diag = state.diagonal()
        rows.append(
            [traj.times[i], distances[i], norms[i], traj.boundary_occupancy[i]]
            + [diag[j] for j in range(k)]
        )
    meta = header_pairs(
        "evolve", args.seed, nu=args.nu, r=params.r, mu=args.mu,
        zeta_plus=args.zeta_plus, zeta_minus=args.zeta_minus,
        dim=args.dim, tail_tol=args.tail_tol, initial=args.initial,
        t_final=args.t,
        norm_note="weighted_hs_norm uses the inverse-weighted state embedding",
    )
    out = _resolve_out(args, f"trajectory.{args.format}")
    if args.format == "csv":
        write_csv(out, meta, columns, rows)
    else:
        write_json(out, meta, {"columns": columns, "rows": [list(r) for r in rows]})

    mu2 = args.mu ** 2
    rate_text = "n/a"
    if have_reference:
        try:
            fit = decay_rate(traj, reference, pi)
            rate_text = f"{fmt_float(fit.rate * mu2)} (R^2 = {fit.r_squared:.6f})"
        except ValueError:
            rate_text = "n/a"
    print(
        f"final trace distance = {fmt_float(distances[-1])}; fitted decay rate = {rate_text}; "
        f"trajectory written to {out}"
    )
    return EXIT_OK


def cmd_equivalence(args):
    inferred_r = {"even": 0.5, "odd": 1.5}[args.parity]
    r = inferred_r if args.r is None else args.r
    nu = 0.5 if args.nu is None else args.nu
    params = ModelParams.from_nu(
        nu, r=r, mu=1.0, zeta_plus=args.zeta_plus, zeta_minus=args.zeta_minus
    )
    xi_plus = args.zeta_plus if args.xi_plus is None else args.xi_plus
    xi_minus = args.zeta_minus if args.xi_minus is None else args.xi_minus
    rep = two_photon_check(params, xi_plus, xi_minus, args.parity, TruncationSpec(args.dim))
    mu2 = args.mu ** 2
    payload = {
        "parity": rep.parity,
        "r": rep.r,
        "nu": nu,
        "mu": args.mu,
        "dim": rep.dim,
        "xi_plus": rep.xi_plus,
        "xi_minus": rep.xi_minus,
        "zeta_plus": args.zeta_plus,
        "zeta_minus": args.zeta_minus,
        "proportionality_constant": rep.proportionality_constant,
        "max_residual": rep.max_residual * mu2,
        "convention_note": rep.convention_note,
    }
    meta = header_pairs(
        "equivalence", args.seed, parity=args.parity, r=r, nu=nu, mu=args.mu, dim=args.dim,
    )
    out = _resolve_out(args, f"equivalence.{args.format}")
    if args.format == "json":
        write_json(out, meta, payload)
    else:
        write_csv(out, meta, ("key", "value"), _kv_rows(payload))
    print(
        f"constant = {rep.proportionality_constant:.12f}, "
        f"max residual = {rep.max_residual:.3e}; report written to {out}"
    )
    return EXIT_OK


def cmd_selftest(args):
    results = run_acceptance(quick=args.quick)
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"criterion {res.number:02d} {status} {res.name} ({res.seconds:.2f}s): {res.detail}")
    n_fail = sum(1 for r in results if not r.passed)
    if args.out:
        payload = {
            "quick": args.quick,
            "n_criteria": len(results),
            "n_failed": n_fail,
            "results": [
                {
                    "number": r.number,
                    "name": r.name,
                    "passed": r.passed,
                    "detail": r.detail,
                    "seconds": round(r.seconds, 3),
                }
                for r in results
            ],
        }
        write_json(Path(args.out), header_pairs("selftest", args.seed, quick=args.quick), payload)
    print(f"{len(results) - n_fail}/{len(results)} criteria passed")
    return EXIT_OK if n_fail == 0 else EXIT_SELFTEST


_DISPATCH = {
    "gap": cmd_gap,
    "region": cmd_region,
    "evolve": cmd_evolve,
    "equivalence": cmd_equivalence,
    "selftest": cmd_selftest,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID
    try:
        return _DISPATCH[args.command](args)
    except (ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (TruncationOverflowError, PositivityError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
