"""Command-line interface: ``univmc <subcommand> ...``.

Global flags go before the subcommand: ``--seed`` (default seed for
randomized steps), ``--threads`` (worker processes for sweeps) and
``--json`` (print the report as JSON on stdout instead of a summary).
Subcommand ``--json PATH`` options write the same report to a file.
Exit status is 0 on success, 1 when ``certify`` fails, 2 on errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .errors import (
    ConstructionFailureError,
    FileFormatError,
    GenerationFailureError,
    InvalidArgumentError,
    NumericalFailureError,
)

_ERRORS = (InvalidArgumentError, FileFormatError, GenerationFailureError, ConstructionFailureError,
           NumericalFailureError, OSError)


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _emit(args, report, summary_lines, path=None, exclude=()):
    from .io import save_json, to_jsonable

    if path:
        save_json(path, report, exclude=exclude)
    if args.json_stdout:
        data = to_jsonable(report)
        if isinstance(data, dict):
            data = {k: v for k, v in data.items() if k not in exclude}
        json.dump(data, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        for line in summary_lines:
            print(line)


def cmd_gen_graph(args):
    from .graphs import BlockModelParams, gen_block_model, gen_erdos_renyi, gen_random_d_regular, trim, spectrum
    from .io import save_edges

    n2 = args.n2 if args.n2 is not None else args.n1
    if args.family == "dregular":
        if n2 != args.n1:
            raise InvalidArgumentError("the d-regular family needs n1 == n2")
        if args.d is None:
            raise InvalidArgumentError("--d is required for the d-regular family")
        omega = gen_random_d_regular(args.n1, args.d, seed=args.seed)
    elif args.family == "er":
        if args.p is None:
            raise InvalidArgumentError("--p is required for the Erdos-Renyi family")
        omega = gen_erdos_renyi(args.n1, n2, args.p, seed=args.seed)
    else:
        if args.p is None or args.q is None:
            raise InvalidArgumentError("--p and --q are required for the block family")
        omega = gen_block_model(BlockModelParams(args.n1, n2, args.p, args.q, seed=args.seed))
    if args.trim_factor is not None:
        omega = trim(omega, args.trim_factor)
    if omega.size == 0:
        raise GenerationFailureError("generated sample set has no edges")
    save_edges(args.out, omega)
    rep = spectrum(omega)
    _emit(args, rep, [f"wrote {omega.size} edges ({omega.n1}x{omega.n2}) to {args.out}",
                      f"sigma1={rep.sigma1:.6g} sigma2={rep.sigma2:.6g} relative_gap={rep.relative_gap:.6g}"])
    return 0


def cmd_spectrum(args):
    from .graphs import spectrum
    from .io import load_edges

    rep = spectrum(load_edges(args.edges))
    _emit(args, rep, [
        f"sigma1={rep.sigma1:.6g} sigma2={rep.sigma2:.6g} relative_gap={rep.relative_gap:.6g}",
        f"measured_C={rep.measured_C:.6g} regular={rep.is_row_regular and rep.is_col_regular} d={rep.d} "
        f"ramanujan={rep.ramanujan}",
    ], path=args.json)
    return 0


def _factor(path, rank):
    from .core import LowRankFactor
    from .io import load_matrix

    return LowRankFactor.from_matrix(load_matrix(path), rank)


def cmd_check_incoherence(args):
    from .incoherence import audit
    from .io import load_edges

    f = _factor(args.matrix, args.rank)
    rep = audit(f, load_edges(args.edges), delta_budget=args.delta_budget, trials=args.trials, seed=args.seed,
                gate=args.gate)
    _emit(args, rep, [
        f"mu0={rep.mu0:.6g} mu1={rep.mu1:.6g} delta_d={rep.delta_d:.6g} ({rep.delta_method}) "
        f"claim1_bound={rep.delta_upper_bound:.6g}",
        f"A1={'pass' if rep.a1_pass else 'fail'} A2={'pass' if rep.a2_pass else 'fail'} "
        f"d={rep.d} required_d={rep.required_d:.6g}",
    ], path=args.json)
    return 0


def cmd_approx(args):
    from .completion import spectral_approx
    from .io import load_edges, load_matrix, save_matrix

    omega = load_edges(args.edges)
    X = spectral_approx(load_matrix(args.observed), omega, args.rank, allow_irregular=args.allow_irregular)
    save_matrix(args.out, X)
    _emit(args, {"out": args.out, "rank": args.rank, "scale": omega.scale},
          [f"wrote rank-{args.rank} estimate to {args.out} (scale {omega.scale:.6g})"])
    return 0


def cmd_complete(args):
    from .completion import SolverConfig, solve_nuclear_norm
    from .io import load_edges, load_matrix, save_matrix

    omega = load_edges(args.edges)
    cfg = SolverConfig(max_iters=args.max_iters, tol=args.tol, seed=args.seed)
    truth = load_matrix(args.truth) if args.truth else None
    res = solve_nuclear_norm(load_matrix(args.observed), omega, cfg, truth=truth)
    if args.out:
        save_matrix(args.out, res.X)
    lines = [f"iterations={res.iterations} residual={res.final_residual:.3e} converged={res.converged}"]
    if truth is not None:
        lines.append(f"rel_error={res.rel_error_vs_truth:.3e} success={res.success}")
    _emit(args, res, lines, path=args.json, exclude=("X", "residual_history"))
    return 0


def cmd_certify(args):
    from .certificate import golfing_construct, verify_certificate
    from .incoherence import audit
    from .io import load_edges

    f = _factor(args.matrix, args.rank)
    omega = load_edges(args.edges)
    inc = audit(f, omega, trials=args.trials, seed=args.seed)
    trace = golfing_construct(f, omega, C=inc.measured_C, mu0=inc.mu0)
    cert = verify_certificate(trace.Y, f, omega, C=inc.measured_C, mu0=inc.mu0)
    report = {
        "incoherence": inc,
        "golfing": {"p": trace.p, "clamped": trace.clamped, "raw_depth": trace.raw_depth,
                    "w_norms": trace.w_norms, "c1": trace.c1, "c2": trace.c2},
        "certificate": cert,
        "passed": cert.passed,
    }
    _emit(args, report, [
        f"golfing depth p={trace.p} ||W_k||_F={['%.3g' % w for w in trace.w_norms]}",
        f"||P_T(Y)-UV^T||_F={cert.pt_residual:.3g} (<= {cert.pt_threshold:.3g}) "
        f"||P_T_perp(Y)||={cert.ptperp_norm:.3g} (< 0.5) supported={cert.supported_on_omega}",
        f"preconditions: d>={cert.required_d:.3g}: {cert.precondition_d}, "
        f"delta_d={cert.delta_d:.3g}<=1/6: {cert.precondition_delta}",
        f"certificate {'PASS' if cert.passed else 'FAIL'}",
    ], path=args.json)
    return 0 if cert.passed else 1


def cmd_counterexample(args):
    from .adversarial import build_counterexample, demonstrate_failure
    from .io import load_edges, save_matrix

    pair = build_counterexample(args.n, load_edges(args.edges))
    save_matrix(args.out_a, pair.Ma)
    save_matrix(args.out_b, pair.Mb)
    report = {"agreement_residual": pair.agreement_residual, "separation": pair.separation,
              "rows": [r + 1 for r in pair.rows]}
    lines = [f"rows {pair.rows[0] + 1},{pair.rows[1] + 1}: agreement_residual={pair.agreement_residual:.3g} "
             f"separation={pair.separation:.6g}"]
    if not args.no_solve:
        fail = demonstrate_failure(pair)
        report["failure"] = fail
        lines.append(f"solver rel_error vs Ma={fail.rel_error_a:.3g} vs Mb={fail.rel_error_b:.3g} "
                     f"non_recovery_confirmed={fail.non_recovery_confirmed}")
    _emit(args, report, lines, path=args.json)
    return 0


def cmd_sweep(args):
    from .completion import SolverConfig
    from .harness import SweepSpec, aggregate, run_sweep, transition_check
    from .io import save_json

    spec = SweepSpec(n=args.n, r=args.r, budgets=tuple(args.budgets), p_grid=args.p_grid, trials=args.trials,
                     noise_sigma=tuple(args.noise_sigma) if args.noise_sigma else None, seed0=args.seed,
                     output_path=args.out,
                     solver=SolverConfig(max_iters=args.max_iters, tol=args.tol))

    def progress(rows):
        if args.verbose:
            for r in rows:
                print(f"budget={r.budget:g} p={r.p:.4g} trial={r.trial} sigma={r.noise_sigma:g} "
                      f"gap={r.relative_gap:.3f} err={r.rel_error:.3e} ok={r.success}", file=sys.stderr)

    rows = run_sweep(spec, threads=args.threads, progress=progress)
    cells = aggregate(rows)
    report = {"cells": cells}
    if not args.noise_sigma:
        report["transition"] = transition_check(cells)
    if args.aggregate:
        save_json(args.aggregate, report)
    lines = [f"wrote {len(rows)} rows to {args.out}"]
    lines += [f"budget={c['budget']:g} p={c['p']:.4g} sigma={c['noise_sigma']:g} gap={c['mean_relative_gap']:.3f} "
              f"success={c['success_ratio']:.2f} mean_err={c['mean_error']:.3e}" for c in cells]
    _emit(args, report, lines)
    return 0


def cmd_real(args):
    from .completion import SolverConfig
    from .harness import aggregate, run_real

    rows = run_real(args.matrix, budgets=tuple(args.budgets), p_grid=args.p_grid, trials=args.trials,
                    seed0=args.seed, cfg=SolverConfig(max_iters=args.max_iters, tol=args.tol),
                    rank=args.rank if args.rank > 0 else None, threads=args.threads, output_path=args.out)
    cells = aggregate(rows)
    floor = rows[0].floor
    lines = [f"rank-1 floor sigma2/sigma1={floor:.4g}"]
    lines += [f"budget={c['budget']:g} p={c['p']:.4g} gap={c['mean_relative_gap']:.3f} "
              f"spectral_error={c['mean_error']:.4g}" for c in cells]
    _emit(args, {"floor": floor, "cells": cells}, lines)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="univmc", description="Low-rank matrix completion from expander-graph samples.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized steps (default 0)")
    ap.add_argument("--threads", type=int, default=1, help="worker processes for sweeps (default 1)")
    ap.add_argument("--json", dest="json_stdout", action="store_true", help="print reports as JSON on stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-graph", help="generate a sampling graph as an edge list")
    p.add_argument("--family", choices=("dregular", "er", "block"), required=True)
    p.add_argument("--n1", type=int, required=True)
    p.add_argument("--n2", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--trim-factor", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_graph)

    p = sub.add_parser("spectrum", help="spectral audit of a sampling graph")
    p.add_argument("--edges", required=True)
    p.add_argument("--json")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("check-incoherence", help="measure mu0, mu1 and delta_d of a matrix's rank-r factor")
    p.add_argument("--matrix", required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--edges", required=True)
    p.add_argument("--delta-budget", type=float, default=1.0 / 6.0)
    p.add_argument("--trials", type=int, default=20000)
    p.add_argument("--gate", choices=("measured", "claim1"), default="measured")
    p.add_argument("--json")
    p.set_defaults(func=cmd_check_incoherence)

    p = sub.add_parser("approx", help="rescaled rank-k estimate from observed entries")
    p.add_argument("--observed", required=True)
    p.add_argument("--edges", required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--allow-irregular", action="store_true")
    p.set_defaults(func=cmd_approx)

    p = sub.add_parser("complete", help="nuclear-norm completion of observed entries")
    p.add_argument("--observed", required=True)
    p.add_argument("--edges", required=True)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--truth")
    p.add_argument("--out")
    p.add_argument("--json")
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("certify", help="build and verify a golfing dual certificate (exit 0 iff it passes)")
    p.add_argument("--matrix", required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--edges", required=True)
    p.add_argument("--trials", type=int, default=20000)
    p.add_argument("--json")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("counterexample", help="two rank-2 matrices that agree on a sparse sample set")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--edges", required=True)
    p.add_argument("--out-a", required=True)
    p.add_argument("--out-b", required=True)
    p.add_argument("--no-solve", action="store_true", help="skip the completion run")
    p.add_argument("--json")
    p.set_defaults(func=cmd_counterexample)

    for name, help_ in (("sweep", "block-model phase-transition sweep with Gaussian factors"),
                        ("real", "block-model sweep over a user-supplied matrix")):
        p = sub.add_parser(name, help=help_)
        if name == "sweep":
            p.add_argument("--n", type=int, default=500)
            p.add_argument("--r", type=int, default=10)
            p.add_argument("--noise-sigma", type=_floats)
            p.add_argument("--aggregate", help="write per-cell summary JSON here")
            p.add_argument("--verbose", action="store_true")
        else:
            p.add_argument("--matrix", required=True)
            p.add_argument("--rank", type=int, default=1, help="truncation rank before scoring (0 keeps all)")
        p.add_argument("--budgets", type=_floats, default=[0.2, 0.3, 0.4])
        p.add_argument("--p-grid", type=_floats, help="p values (default: 9 points from budget/2 to budget)")
        p.add_argument("--trials", type=int, default=50 if name == "sweep" else 1)
        p.add_argument("--tol", type=float, default=1e-7)
        p.add_argument("--max-iters", type=int, default=500)
        p.add_argument("--out", required=True, help="CSV output path")
        p.set_defaults(func=cmd_sweep if name == "sweep" else cmd_real)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
