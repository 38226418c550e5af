"""Command-line front end.

Every subcommand loads its inputs, calls one library entry point and
serializes the result; no numerics live here. Exit codes: 0 success,
1 validation error, 2 numerical failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from . import exact, flows, jacobi, model, numeric, tree
from .errors import (
    DivergenceError,
    InvalidArgumentError,
    LCMError,
    NotConvergedError,
    NumericalError,
    ValidationError,
)
from .stable import StableParams

__all__ = ["main", "run"]

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidArgumentError(f"{self.prog}: {message}")


# output helpers

def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _dumps(obj):
    # json writes floats with repr, which round-trips (17 significant digits at most)
    return json.dumps(obj, indent=1) + "\n"


def _laws_csv(labels, laws, flags=None):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["label", "alpha", "beta", "gamma", "delta", "flag"])
    flags = flags or [""] * len(laws)
    for label, p, flag in zip(labels, laws, flags):
        if p is None:
            writer.writerow([label, "", "", "", "", flag])
        else:
            writer.writerow([label] + [f"{x:.17g}" for x in p.as_tuple()] + [flag])
    return buf.getvalue()


def _laws_model_dict(m, laws, side, stats):
    d = {
        "alpha": m.alpha,
        "labels": list(m.labels),
        "A": m.A.tolist(),
        "side": side,
        "params": [None if p is None else [p.beta, p.gamma, p.delta] for p in laws],
        "stats": stats,
    }
    return d


def _posterior_output(args, m, result):
    if args.format == "csv":
        return _laws_csv(result.labels, result.x_given_y, result.flags)
    stats = dict(result.solver_stats)
    stats["flags"] = result.flags
    return _dumps(_laws_model_dict(m, result.x_given_y, "x", stats))


# subcommands

def cmd_forward(args):
    m = model.load_model(args.model)
    laws = exact.forward_params(m, skew_power=args.skew_power)
    if args.format == "csv":
        return _laws_csv(m.labels, laws)
    return _dumps(_laws_model_dict(m, laws, "y", {"skew_power": args.skew_power}))


def cmd_posterior(args):
    m = model.load_model(args.model)
    result = exact.posterior_params(m, strict=not args.lenient)
    return _posterior_output(args, m, result)


def cmd_jacobi(args):
    m = model.load_model(args.model)
    opts = jacobi.JacobiOptions(
        tol=args.tol, max_iter=args.max_iter, damping=args.damping, record_trace=False, xi_form=args.xi_form
    )
    trace_path = args.trace
    if trace_path is None and args.out is not None:
        trace_path = args.out + ".trace.csv"
    try:
        result, trace = jacobi.jacobi_run(m, opts)
    except (NotConvergedError, DivergenceError) as exc:
        if trace_path is not None and exc.trace is not None:
            with open(trace_path, "w", newline="") as fh:
                exc.trace.to_csv(fh)
        raise
    if trace_path is not None:
        with open(trace_path, "w", newline="") as fh:
            trace.to_csv(fh)
    return _posterior_output(args, m, result)


def cmd_tree(args):
    m = model.load_model(args.model)
    laws = tree.csp_run(m, root=args.root)
    if args.format == "csv":
        return _laws_csv(m.labels, laws)
    return _dumps(_laws_model_dict(m, laws, "x", {"method": "tree", "root": args.root}))


def cmd_check(args):
    m = model.load_model(args.model)
    rep = model.check_convergence_conditions(m, tol=args.tol)
    fields = ["rho_absR", "rho_absR_alpha", "rho_R", "condition1_holds", "condition2_holds", "normalized"]
    if args.format == "csv":
        return ",".join(fields) + "\n" + ",".join(
            f"{getattr(rep, f):.17g}" if isinstance(getattr(rep, f), float) else str(getattr(rep, f)).lower()
            for f in fields
        ) + "\n"
    return _dumps({f: getattr(rep, f) for f in fields})


def cmd_pdf(args):
    p = StableParams(args.alpha, args.beta, args.gamma, args.delta)
    grid = numeric.pdf_from_cf(p, args.range[0], args.range[1], args.n)
    if args.format == "json":
        return _dumps({"x0": grid.x0, "dx": grid.dx, "values": grid.values.tolist()})
    return grid.to_csv()


ORACLE_CASES = {
    "convolution": [
        ((2, 0, 1, 0), (2, 0, 1, 3)),
        ((1, 0, 2, 0), (1, 0, 1, 0)),
        ((1.5, 0.7, 1, 2), (1.5, -0.3, 2, -1)),
        ((1, 1, 1, 0), (1, 1, 1, 0)),
    ],
    "slicing": [
        (2.0, [[1, 0], [0, 1]], [(2, 0, 1, 0), (2, 0, 1, 0)]),
        (1.0, [[1, 1], [0, 1]], [(1, 0, 1, 0), (1, 0, 1, 0)]),
        (1.5, [[1, 0.3], [0.2, 1]], [(1.5, 0.6, 1, 0.5), (1.5, -0.4, 2, -1)]),
    ],
}


def cmd_oracle(args):
    rows = []
    if args.which in ("convolution", "all"):
        for a, b in ORACLE_CASES["convolution"]:
            p1, p2 = StableParams(*a), StableParams(*b)
            rep = numeric.convolution_oracle(p1, p2)
            rows.append({"oracle": "convolution", "case": f"{p1!r} + {p2!r}", **rep.__dict__})
    if args.which in ("slicing", "all"):
        for alpha, A, xs in ORACLE_CASES["slicing"]:
            rep = numeric.slicing_oracle_2var(alpha, A, [StableParams(*x) for x in xs])
            rows.append({"oracle": "slicing", "case": f"alpha={alpha:g} A={A}", **rep.__dict__})
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["oracle", "case", "max_abs_err", "argmax_t_or_x", "grid_spec"])
        for r in rows:
            writer.writerow([r["oracle"], r["case"], f"{r['max_abs_err']:.17g}", f"{r['argmax_t_or_x']:.17g}", r["grid_spec"]])
        return buf.getvalue()
    return _dumps(rows)


def cmd_synth(args):
    records, topology, partition = flows.synth_planetlab_surrogate(args.n, args.rho, args.seed)
    outdir = args.out or "."
    os.makedirs(outdir, exist_ok=True)
    flows.write_flow_params(records, os.path.join(outdir, "flows.csv"))
    flows.write_topology(topology, os.path.join(outdir, "topology.csv"))
    flows.write_partition(partition, os.path.join(outdir, "partition.json"))
    m = flows.build_observation_model(records, topology, partition)
    model.save_model(m, os.path.join(outdir, "model.json"))
    sys.stdout.write(f"wrote flows.csv, topology.csv, partition.json, model.json to {outdir}\n")
    return None


def cmd_flow_report(args):
    records = flows.ingest_flow_params(args.flows)
    topology = flows.read_topology(args.topology)
    partition = flows.read_partition(args.partition)
    m = flows.build_observation_model(records, topology, partition)
    if args.method == "jacobi":
        opts = jacobi.JacobiOptions(tol=args.tol, max_iter=args.max_iter, record_trace=False)
        result, _ = jacobi.jacobi_run(m, opts)
    else:
        result = exact.posterior_params(m, strict=False)
    rep = flows.report(result, records)
    if args.format == "json":
        return rep.to_json() + "\n"
    sys.stderr.write(rep.storage_note + "\n")
    return rep.to_tsv()


# parser

def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), help="default: csv for pdf, json otherwise")
    common.add_argument("--threads", type=int, default=1, help="parallelism hint; results do not depend on it")
    common.add_argument("--seed", type=int, default=0, help="random seed (synth)")

    with_model = _Parser(add_help=False)
    with_model.add_argument("--model", required=True, help="model JSON file")

    iterative = _Parser(add_help=False)
    iterative.add_argument("--tol", type=float, default=1e-8)
    iterative.add_argument("--max-iter", type=int, default=10000)

    parser = _Parser(prog="lcmstable", description="Inference in linear models with stable variables.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("forward", parents=[common, with_model], help="observation laws of Y = AX (+ Z)")
    p.add_argument("--skew-power", choices=("alpha", "one"), default="alpha")
    p.set_defaults(func=cmd_forward)

    p = sub.add_parser("posterior", parents=[common, with_model], help="closed-form posterior laws of X")
    p.add_argument("--lenient", action="store_true", help="flag nonphysical rows instead of failing")
    p.set_defaults(func=cmd_posterior)

    p = sub.add_parser("jacobi", parents=[common, with_model, iterative], help="Stable-Jacobi iteration")
    p.add_argument("--damping", type=float, default=0.0)
    p.add_argument("--xi-form", choices=("consistent", "printed"), default="consistent")
    p.add_argument("--trace", help="trace CSV path (default: <out>.trace.csv when --out is given)")
    p.set_defaults(func=cmd_jacobi)

    p = sub.add_parser("tree", parents=[common, with_model], help="message passing on a tree model")
    p.add_argument("--root", type=int, default=0)
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("check", parents=[common, with_model], help="convergence diagnostics")
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("pdf", parents=[common], help="density grid by cf inversion")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--range", type=float, nargs=2, metavar=("XMIN", "XMAX"), default=(-8.0, 8.0))
    p.add_argument("--n", type=int, default=1024)
    p.set_defaults(func=cmd_pdf)

    p = sub.add_parser("oracle", parents=[common], help="run the brute-force cf oracles")
    p.add_argument("--which", choices=("convolution", "slicing", "all"), default="all")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("synth", parents=[common], help="write a synthetic flow instance to --out DIR")
    p.add_argument("--n", type=int, default=376)
    p.add_argument("--rho", type=float, default=0.02)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("flow-report", parents=[common, iterative], help="per-node posterior flow table")
    p.add_argument("--flows", required=True)
    p.add_argument("--topology", required=True)
    p.add_argument("--partition", required=True)
    p.add_argument("--method", choices=("exact", "jacobi"), default="exact")
    p.set_defaults(func=cmd_flow_report)
    return parser


def _error_exit(exc, code, fmt):
    sys.stderr.write(f"error: {exc}\n")
    if fmt == "json":
        payload = {"error": type(exc).__name__, "exit_code": code, "message": str(exc)}
        sys.stderr.write(json.dumps(payload) + "\n")
    return code


def run(argv=None):
    """Parse ``argv``, run one subcommand and return its exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    # known before parsing so that usage errors honor --format json too
    fmt = argv[argv.index("--format") + 1] if "--format" in argv[:-1] else None
    try:
        args = build_parser().parse_args(argv)
        if args.format is None:
            args.format = "csv" if args.command == "pdf" else "json"
        fmt = args.format
        if args.threads < 1:
            raise InvalidArgumentError("--threads must be >= 1")
        text = args.func(args)
        if text is not None:
            _emit(text, args.out)
    except ValidationError as exc:
        return _error_exit(exc, EXIT_VALIDATION, fmt)
    except (NumericalError, LCMError) as exc:
        return _error_exit(exc, EXIT_NUMERICAL, fmt)
    except OSError as exc:
        return _error_exit(exc, EXIT_IO, fmt)
    except SystemExit as exc:  # --help
        return exc.code or EXIT_OK
    return EXIT_OK


def main():
    sys.exit(run())
