"""Reproducible recovery experiments driven by a JSON config.

Example config::

    {
      "graph": {"generator": "erdos_renyi", "n": 20, "p": 0.3, "seed": 7},
      "support": {"j": 3, "seed": 1},
      "signal": {"seed": 2},
      "time": {"fraction_grid": [0.25, 0.5, 0.9]},
      "noise": {"eps": [0.0, 0.01, 0.1], "model": "sphere", "seed": 3},
      "repeats": 2,
      "output": {"csv": "trials.csv", "json": "trials.json"}
    }

Trials run over repeats x times x noise levels, in that nesting order.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import jsonschema
import numpy as np

from . import bounds, certificate, heat, recovery
from .exceptions import ConfigInvalid, HeatRecoveryError, NonPositiveTime
from .generators import GENERATORS, generate_graph, place_support
from .graph import compatible_metric, laplacian, min_separation
from .io import read_graph

BOUND_SLACK = 1e-6

_seed = {"type": "integer", "minimum": 0}
_pos_list = {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["graph", "support", "time"],
    "additionalProperties": False,
    "properties": {
        "graph": {
            "oneOf": [
                {
                    "type": "object",
                    "required": ["file"],
                    "additionalProperties": False,
                    "properties": {"file": {"type": "string"}},
                },
                {
                    "type": "object",
                    "required": ["generator"],
                    "additionalProperties": False,
                    "properties": {
                        "generator": {"enum": sorted(GENERATORS)},
                        "n": {"type": "integer", "minimum": 2},
                        "rows": {"type": "integer", "minimum": 1},
                        "cols": {"type": "integer", "minimum": 1},
                        "p": {"type": "number", "minimum": 0, "maximum": 1},
                        "seed": _seed,
                        "weight": {"type": "number", "exclusiveMinimum": 0},
                        "weight_range": {
                            "type": "array",
                            "items": {"type": "number", "exclusiveMinimum": 0},
                            "minItems": 2,
                            "maxItems": 2,
                        },
                    },
                },
            ]
        },
        "support": {
            "oneOf": [
                {
                    "type": "object",
                    "required": ["vertices"],
                    "additionalProperties": False,
                    "properties": {
                        "vertices": {
                            "type": "array",
                            "items": {"type": "integer", "minimum": 0},
                            "minItems": 1,
                            "uniqueItems": True,
                        }
                    },
                },
                {
                    "type": "object",
                    "required": ["j"],
                    "additionalProperties": False,
                    "properties": {"j": {"type": "integer", "minimum": 1}, "seed": _seed},
                },
            ]
        },
        "signal": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "coefficients": {"type": "array", "items": {"type": "number", "not": {"const": 0}}},
                "seed": _seed,
                "magnitude_range": {
                    "type": "array",
                    "items": {"type": "number", "exclusiveMinimum": 0},
                    "minItems": 2,
                    "maxItems": 2,
                },
            },
        },
        "time": {
            "type": "object",
            "minProperties": 1,
            "maxProperties": 1,
            "additionalProperties": False,
            "properties": {
                "t": {"type": "number", "exclusiveMinimum": 0},
                "fraction": {"type": "number", "exclusiveMinimum": 0},
                "grid": _pos_list,
                "fraction_grid": _pos_list,
            },
        },
        "noise": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "eps": {
                    "oneOf": [
                        {"type": "number", "minimum": 0},
                        {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
                    ]
                },
                "model": {"enum": ["sphere", "gaussian"]},
                "seed": _seed,
            },
        },
        "repeats": {"type": "integer", "minimum": 1},
        "certificate": {"type": "boolean"},
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "gap_tol": {"type": "number", "exclusiveMinimum": 0},
                "max_iter": {"type": "integer", "minimum": 1},
            },
        },
        "workers": {"type": "integer", "minimum": 1},
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"csv": {"type": "string"}, "json": {"type": "string"}},
        },
    },
}


@dataclass
class TrialRecord:
    trial: int
    repeat: int
    n: int
    op_norm: float
    gap: float
    zeta: float
    j: int
    d_min: float
    t_max: float
    t: float
    eps: float
    signal_seed: int | None
    noise_seed: int | None
    cond1_lhs: float | None = None
    cond1_rhs: float | None = None
    cond2_lhs: float | None = None
    cond2_rhs: float | None = None
    cond1_ok: bool | None = None
    cond2_ok: bool | None = None
    inverse_norm_bound: float | None = None
    cert_unit_sup: bool | None = None
    cert_interpolates: bool | None = None
    cert_strictly_interior: bool | None = None
    cert_margin: float | None = None
    delta: float | None = None
    l1_error: float | None = None
    l2_error: float | None = None
    residual: float | None = None
    bound_l1: float | None = None
    bound_held: bool | None = None
    split_ok: bool | None = None
    cone_ok: bool | None = None
    status: str = ""
    iterations: int | None = None
    error: str = ""
    wall_time: float = 0.0

    @property
    def failed(self) -> bool:
        return bool(self.error) or self.status != recovery.OPTIMAL


# wall_time is left out so repeated runs give identical files
CSV_COLUMNS = [f.name for f in fields(TrialRecord) if f.name != "wall_time"]


def load_config(path) -> dict:
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    base = Path(path).parent
    if "file" in cfg.get("graph", {}):
        cfg["graph"]["file"] = str(base / cfg["graph"]["file"])
    return validate_config(cfg)


def validate_config(cfg: dict) -> dict:
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigInvalid(f"{where}: {exc.message}") from None
    for key in ("grid", "fraction_grid"):
        grid = cfg["time"].get(key)
        if grid is not None and any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigInvalid(f"time/{key} must be strictly increasing")
    coeffs = cfg.get("signal", {}).get("coefficients")
    if coeffs is not None and "vertices" in cfg["support"]:
        if len(coeffs) != len(cfg["support"]["vertices"]):
            raise ConfigInvalid("signal/coefficients must match the support size")
    return cfg


@dataclass
class _Setup:
    spectral: heat.SpectralData
    constants: bounds.GraphConstants
    support: list
    profile: bounds.SupportProfile
    t_max: float


def _prepare(cfg: dict) -> _Setup:
    try:
        if "file" in cfg["graph"]:
            graph, metric = read_graph(cfg["graph"]["file"])
        else:
            graph, metric = generate_graph(cfg["graph"]), None
        metric = metric or compatible_metric(graph)
        n = graph.n_vertices
        if "vertices" in cfg["support"]:
            support = [int(v) for v in cfg["support"]["vertices"]]
            if max(support) >= n:
                raise ConfigInvalid(f"support vertex {max(support)} outside graph of {n}")
        else:
            if cfg["support"]["j"] > n:
                raise ConfigInvalid(f"support size exceeds vertex count {n}")
            support, _ = place_support(metric, cfg["support"]["j"], cfg["support"].get("seed", 0))
        spectral = heat.decompose(laplacian(graph))
        constants = bounds.graph_constants(spectral, metric)
    except ConfigInvalid:
        raise
    except (HeatRecoveryError, ValueError, OSError) as exc:
        raise ConfigInvalid(str(exc)) from exc
    profile = bounds.SupportProfile(len(support), min_separation(metric, support))
    t_max = bounds.max_admissible_time(constants, profile)
    return _Setup(spectral, constants, support, profile, t_max)


def _time_grid(cfg: dict, t_max: float) -> list[float]:
    spec = cfg["time"]
    if "t" in spec:
        return [spec["t"]]
    if "grid" in spec:
        return list(spec["grid"])
    fractions = [spec["fraction"]] if "fraction" in spec else spec["fraction_grid"]
    return [f * t_max for f in fractions]


def _eps_grid(cfg: dict) -> list[float]:
    eps = cfg.get("noise", {}).get("eps", 0.0)
    return list(eps) if isinstance(eps, list) else [eps]


def _signal(cfg: dict, support, repeat: int) -> np.ndarray:
    sig = cfg.get("signal", {})
    if "coefficients" in sig:
        return np.asarray(sig["coefficients"], dtype=float)
    rng = np.random.default_rng([sig.get("seed", 0), repeat])
    lo, hi = sig.get("magnitude_range", [0.5, 2.0])
    return rng.uniform(lo, hi, len(support)) * rng.choice([-1.0, 1.0], len(support))


def _run_trial(cfg, setup: _Setup, trial, repeat, t_index, t, e_index, eps) -> TrialRecord:
    start = time.perf_counter()
    c, p = setup.constants, setup.profile
    noise = cfg.get("noise", {})
    rec = TrialRecord(
        trial=trial,
        repeat=repeat,
        n=c.n,
        op_norm=c.op_norm,
        gap=c.gap,
        zeta=c.zeta,
        j=p.j,
        d_min=p.d_min,
        t_max=setup.t_max,
        t=t,
        eps=eps,
        signal_seed=cfg.get("signal", {}).get("seed", 0),
        noise_seed=noise.get("seed", 0),
    )
    try:
        if not t > 0:
            raise NonPositiveTime(f"trial time {t} is not positive (T* = {setup.t_max})")
        report = bounds.check_certificate_condition(c, p, t)
        for name in bounds.FEASIBILITY_FIELDS[1:]:
            setattr(rec, name, getattr(report, name))

        h_op = heat.heat_operator(setup.spectral, t)
        coeffs = _signal(cfg, setup.support, repeat)
        cert = None
        if cfg.get("certificate", True):
            cert = certificate.construct(h_op, setup.support, np.sign(coeffs))
            verdict = certificate.verify(cert)
            rec.cert_unit_sup = verdict.unit_sup
            rec.cert_interpolates = verdict.interpolates
            rec.cert_strictly_interior = verdict.strictly_interior
            rec.cert_margin = verdict.interior_margin

        g = np.zeros(c.n)
        g[setup.support] = coeffs
        rng = np.random.default_rng([noise.get("seed", 0), repeat, t_index, e_index])
        w = recovery.sample_noise(c.n, eps, noise.get("model", "sphere"), rng)
        obs = recovery.Observation(h_op.kernel @ g + w, t, eps)
        opts = recovery.SolverOptions(**cfg.get("solver", {}))
        result = recovery.solve(h_op, obs, opts)
        rec.status, rec.iterations, rec.residual = result.status, result.iterations, result.residual

        inv = heat.invert_restricted(heat.restrict(h_op, setup.support))
        rec.delta = recovery.delta_from_inverse(inv)
        budget = recovery.error_budget(p.j, rec.delta, eps)
        audit = recovery.audit_recovery(g, result, budget, cert, tol=BOUND_SLACK)
        rec.l1_error, rec.l2_error = audit.l1_error, audit.l2_error
        rec.bound_l1 = budget.bound_l1
        rec.bound_held = audit.l1_error <= budget.bound_l1 + BOUND_SLACK
        rec.split_ok, rec.cone_ok = audit.split_ok, audit.cone_ok
    except (HeatRecoveryError, ValueError, ArithmeticError) as exc:
        rec.error = f"{type(exc).__name__}: {exc}"
    rec.wall_time = time.perf_counter() - start
    return rec


def run_experiment(cfg: dict) -> list[TrialRecord]:
    """Run every trial of a validated config and return records in grid order.

    Per-trial failures are captured in the record's ``error`` field and
    never abort the run.

    Raises
    ------
    ConfigInvalid
        If the graph or support cannot be built from the config.
    """
    cfg = validate_config(cfg)
    setup = _prepare(cfg)
    times = _time_grid(cfg, setup.t_max)
    epss = _eps_grid(cfg)
    jobs = []
    for repeat in range(cfg.get("repeats", 1)):
        for ti, t in enumerate(times):
            for ei, eps in enumerate(epss):
                jobs.append((len(jobs), repeat, ti, t, ei, eps))
    run = lambda job: _run_trial(cfg, setup, *job)  # noqa: E731
    workers = cfg.get("workers", 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, jobs))
    return [run(job) for job in jobs]


def _csv_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def records_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow([_csv_value(getattr(rec, name)) for name in CSV_COLUMNS])
    return buf.getvalue()


def records_json(records, cfg: dict | None = None) -> str:
    def clean(v):
        return None if isinstance(v, float) and not math.isfinite(v) else v

    payload = {
        "config": cfg,
        "trials": [{k: clean(v) for k, v in asdict(r).items()} for r in records],
    }
    return json.dumps(payload, indent=2)
