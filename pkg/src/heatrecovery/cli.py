"""Command line interface.

Exit codes: 0 on success, 1 on invalid input or config, 2 when a solve or
some experiment trial did not succeed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bounds, certificate, experiment, heat, recovery
from .exceptions import HeatRecoveryError
from .generators import GENERATORS, generate_graph
from .graph import compatible_metric, laplacian
from .io import format_graph, matrix_csv, read_graph, read_vector, vertex_values_csv

EXIT_OK, EXIT_INPUT, EXIT_FAILURES = 0, 1, 2


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _finite(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    return obj


def _emit(payload, out=None):
    text = json.dumps(_finite(payload), indent=2, default=_json_default)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


class _Instance:
    """Graph, metric and spectrum loaded from a graph file."""

    def __init__(self, path):
        self.graph, metric = read_graph(path)
        self.metric = metric or compatible_metric(self.graph)
        self.spectral = heat.decompose(laplacian(self.graph))
        self.constants = bounds.graph_constants(self.spectral, self.metric)

    def profile(self, support):
        return bounds.support_profile(self.metric, support)

    def time(self, args, support) -> float:
        if args.t is not None:
            return args.t
        return args.fraction * bounds.max_admissible_time(self.constants, self.profile(support))


def _add_time(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--t", type=float, help="diffusion time")
    g.add_argument("--fraction", type=float, help="time as a fraction of the largest admissible time")


def cmd_gen_graph(args) -> int:
    spec = {"generator": args.generator}
    for key in ("n", "rows", "cols", "p", "seed", "weight"):
        if getattr(args, key) is not None:
            spec[key] = getattr(args, key)
    if args.weight_range:
        spec["weight_range"] = args.weight_range
    graph = generate_graph(spec)
    text = format_graph(graph, compatible_metric(graph) if args.with_metric else None)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_check(args) -> int:
    inst = _Instance(args.graph)
    report = bounds.check_certificate_condition(inst.constants, inst.profile(args.support), args.t)
    if args.format == "csv":
        sys.stdout.write(",".join(bounds.FEASIBILITY_FIELDS) + "\n")
        sys.stdout.write(",".join("" if v is None else str(v) for v in report.csv_row()) + "\n")
    else:
        _emit(report.to_dict())
    if args.kernel_csv:
        Path(args.kernel_csv).write_text(matrix_csv(heat.heat_operator(inst.spectral, args.t).kernel))
    return EXIT_OK


def cmd_max_time(args) -> int:
    inst = _Instance(args.graph)
    p = inst.profile(args.support)
    t_max = bounds.max_admissible_time(inst.constants, p)
    _emit({"t_max": t_max, "j": p.j, "d_min": p.d_min, **vars(inst.constants)})
    return EXIT_OK


def cmd_certificate(args) -> int:
    inst = _Instance(args.graph)
    signs = args.signs or [1.0] * len(args.support)
    t = inst.time(args, args.support)
    h_op = heat.heat_operator(inst.spectral, t)
    cert = certificate.construct(h_op, args.support, signs)
    verdict = certificate.verify(cert, tol=args.tol)
    _emit(cert.to_dict(verdict))
    if args.dump_h:
        Path(args.dump_h).write_text(vertex_values_csv(cert.values))
    return EXIT_OK


def cmd_recover(args) -> int:
    inst = _Instance(args.graph)
    n = inst.graph.n_vertices
    g_true = None
    if args.f:
        if args.t is None:
            raise HeatRecoveryError("--fraction needs a support; pass --t with --f")
        t = args.t
        h_op = heat.heat_operator(inst.spectral, t)
        f = read_vector(args.f)
    else:
        if not args.support:
            raise HeatRecoveryError("pass either --f or --support to synthesize an observation")
        coeffs = args.coeffs or [1.0] * len(args.support)
        if len(coeffs) != len(args.support):
            raise HeatRecoveryError("--coeffs must match --support")
        t = inst.time(args, args.support)
        h_op = heat.heat_operator(inst.spectral, t)
        g_true = np.zeros(n)
        g_true[args.support] = coeffs
        rng = np.random.default_rng(args.seed)
        w = recovery.sample_noise(n, args.eps, args.noise_model, rng)
        f = h_op.kernel @ g_true + w
    obs = recovery.Observation(f, t, args.eps)
    opts = recovery.SolverOptions(gap_tol=args.gap_tol, max_iter=args.max_iter)
    result = recovery.solve(h_op, obs, opts)
    payload = {"t": t, "eps": args.eps, "seed": args.seed, "result": result.to_dict()}
    if g_true is not None:
        inv = heat.invert_restricted(heat.restrict(h_op, args.support))
        budget = recovery.error_budget(len(args.support), recovery.delta_from_inverse(inv), args.eps)
        cert = certificate.construct(h_op, args.support, np.sign(coeffs))
        payload["budget"] = budget.to_dict()
        payload["audit"] = recovery.audit_recovery(g_true, result, budget, cert).to_dict()
    _emit(payload, args.output)
    return EXIT_OK if result.status == recovery.OPTIMAL else EXIT_FAILURES


def cmd_experiment(args) -> int:
    cfg = experiment.load_config(args.config)
    if args.workers:
        cfg["workers"] = args.workers
    records = experiment.run_experiment(cfg)
    out = cfg.get("output", {})
    csv_path = args.csv or out.get("csv")
    json_path = args.json or out.get("json")
    csv_text = experiment.records_csv(records)
    if csv_path:
        Path(csv_path).write_text(csv_text)
    if json_path:
        Path(json_path).write_text(experiment.records_json(records, cfg) + "\n")
    if not csv_path and not json_path:
        sys.stdout.write(csv_text)
    n_failed = sum(r.failed for r in records)
    if n_failed:
        print(f"{n_failed} of {len(records)} trials failed", file=sys.stderr)
        return EXIT_FAILURES
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heatrecovery", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-graph", help="write a generated graph file")
    p.add_argument("--generator", choices=sorted(GENERATORS), required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--rows", type=int)
    p.add_argument("--cols", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--weight", type=float)
    p.add_argument("--weight-range", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--with-metric", action="store_true", help="append the constructed metric")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen_graph)

    p = sub.add_parser("check", help="evaluate the sufficient conditions at a time")
    p.add_argument("graph")
    p.add_argument("--support", type=int, nargs="+", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--kernel-csv", help="also write the heat kernel matrix as CSV")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("max-time", help="largest time satisfying the conditions")
    p.add_argument("graph")
    p.add_argument("--support", type=int, nargs="+", required=True)
    p.set_defaults(func=cmd_max_time)

    p = sub.add_parser("certificate", help="build and verify a dual certificate")
    p.add_argument("graph")
    p.add_argument("--support", type=int, nargs="+", required=True)
    p.add_argument("--signs", type=float, nargs="+")
    _add_time(p)
    p.add_argument("--tol", type=float, default=certificate.DEFAULT_TOL)
    p.add_argument("--dump-h", help="write certificate values as CSV (vertex,value)")
    p.set_defaults(func=cmd_certificate)

    p = sub.add_parser("recover", help="solve the l1 recovery program once")
    p.add_argument("graph")
    p.add_argument("--f", help="observation vector file (one value per line)")
    p.add_argument("--support", type=int, nargs="+")
    p.add_argument("--coeffs", type=float, nargs="+")
    _add_time(p)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--noise-model", choices=["sphere", "gaussian"], default="sphere")
    p.add_argument("--gap-tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=50_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("experiment", help="run a JSON-configured experiment")
    p.add_argument("config")
    p.add_argument("--csv")
    p.add_argument("--json")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (HeatRecoveryError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
