"""Command line interface producing verification report documents.

    fbmink <subcommand> [--config FILE] [--out FILE] [--format json|csv]
           [--level N] [--seed N] [--tolerance X] [--jobs N]

Subcommands: identities, curvature, minkowski, af, schur, reilly, sweep,
converge.  Configuration comes from a JSON file validated against the
shipped scenario_config.v1 schema; command line flags override config
fields, which override built-in defaults.

Reports are JSON documents with sorted keys; sweeps default to CSV rows
with a fixed header.  Identical configurations produce byte-identical
output up to the generated_unix_time field.  Exit status: 0 when every
check passed, 1 when a numeric assertion failed (negative deficit beyond
tolerance, failed hypothesis audit, nonfinite value, convergence order
below 3), 2 on configuration or scenario validation errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from typing import Optional

import jsonschema
import numpy as np

from . import __version__
from .ambient import (
    euclidean,
    poincare_ball,
    sectional_curvature_probe,
    sphere_stereographic,
    upper_half_space,
)
from .errors import ConfigError, FbminkError, IOFailure
from .families import (
    CapScenario,
    CapSpec,
    PerturbationSpec,
    default_cap_spec,
    make_perturbed_cap,
    make_umbilical_cap,
    region_margins,
    validate_scenario,
)
from .inequalities import (
    DEFAULT_EQUALITY_TOL,
    REPORT_BUILDERS,
    af_report,
    hypothesis_audit,
    minkowski_report,
    reilly_residual,
    schur_report,
)
from .quadrature import QuadratureRule, RegionQuadrature, SurfaceQuadrature, default_level, refine_study
from .supports import SupportKind, make_support, sample_admissible_points, sample_support_points
from .surfaces import support_umbilicity_residual
from .weights import hessian_identity_residual, neumann_identity_residual, weight_for_support

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_VALIDATION = 2

SUBCOMMANDS = ("identities", "curvature", "minkowski", "af", "schur",
               "reilly", "sweep", "converge")

DEFAULT_TOLERANCE = {
    "identities": 1e-10,
    "curvature": 1e-8,
    "minkowski": 1e-9,
    "af": 1e-9,
    "schur": 1e-9,
    "reilly": 1e-5,
    "sweep": 1e-9,
    "converge": 1e-9,
}

# placements used when the config does not pin support parameters
CANONICAL_SUPPORT_PARAMS = {
    "euclidean_sphere": {"radius": 1.0},
    "hyp_geodesic_sphere": {"chart_radius": 0.5},
    "equidistant": {"theta": math.pi / 6.0},
    "sph_geodesic_sphere": {"chart_radius": 0.5},
}

DEFAULT_SWEEP_EPSILONS = (0.02, 0.04, 0.06, 0.08, 0.10)
DEFAULT_CONVERGE_LEVELS = (8, 12, 16, 24)

MIN_CONVERGENCE_ORDER = 3.0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fbmink",
        description="numerical verification reports for weighted free-boundary "
                    "inequalities on umbilical supports")
    parser.add_argument("command", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="JSON scenario configuration file")
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--format", choices=("json", "csv"), dest="fmt",
                        help="output format; csv is valid for sweep only")
    parser.add_argument("--level", type=int, help="quadrature nodes per axis")
    parser.add_argument("--seed", type=int, help="sampling seed")
    parser.add_argument("--tolerance", type=float,
                        help="pass/fail tolerance for the selected command")
    parser.add_argument("--jobs", type=int, default=1,
                        help="concurrent sweep workers (default 1)")
    return parser


def load_schema() -> dict:
    text = resources.files("fbmink.schema").joinpath("scenario_config.v1.json").read_text()
    return json.loads(text)


def load_config(path: Optional[str]) -> dict:
    if path is None:
        cfg: dict = {"version": 1}
    else:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = fh.read()
        except OSError as e:
            raise IOFailure(f"cannot read config {path}: {e}") from e
        try:
            cfg = json.loads(raw)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    try:
        jsonschema.validate(cfg, load_schema(),
                            cls=jsonschema.Draft202012Validator)
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "(root)"
        raise ConfigError(f"config invalid at {where}: {e.message}") from e
    return cfg


class Settings:
    """Resolved run parameters: flags over config fields over defaults."""

    def __init__(self, command: str, cfg: dict, args: argparse.Namespace):
        self.command = command
        self.n = int(cfg.get("n", 3))
        level = args.level if args.level is not None else cfg.get("quadrature", {}).get("level")
        self.level = int(level) if level is not None else default_level(self.n)
        if self.level < 2:
            raise ConfigError("quadrature level must be at least 2")
        seed = args.seed if args.seed is not None else cfg.get("seed", 0)
        self.seed = int(seed)
        tol = args.tolerance if args.tolerance is not None else cfg.get("tolerance")
        self.tolerance = float(tol) if tol is not None else DEFAULT_TOLERANCE[command]
        self.equality_tolerance = float(cfg.get("equality_tolerance", DEFAULT_EQUALITY_TOL))
        self.samples = int(cfg.get("samples", 100))
        self.jobs = max(1, int(args.jobs))

    @property
    def rule(self) -> QuadratureRule:
        return QuadratureRule(self.level)


def _support_from_config(cfg: dict, n: int):
    sup_cfg = cfg.get("support") or {"kind": "euclidean_plane"}
    kind = sup_cfg["kind"]
    params = dict(CANONICAL_SUPPORT_PARAMS.get(kind, {}))
    params.update(sup_cfg.get("params", {}))
    try:
        return make_support(kind, n, **params), params
    except ValueError as e:
        raise ConfigError(f"support configuration rejected: {e}") from e


def _cap_spec_from_config(cfg: dict, support) -> CapSpec:
    cap_cfg = cfg.get("cap", {})
    radius = cap_cfg.get("radius", default_cap_spec(support).radius)
    axis = cap_cfg.get("axis")
    shift = cap_cfg.get("center_shift")
    return CapSpec(
        support=support,
        radius=float(radius),
        axis=tuple(axis) if axis is not None else None,
        tilt=float(cap_cfg.get("tilt", 0.0)),
        center_distance=cap_cfg.get("center_distance"),
        center_shift=tuple(shift) if shift is not None else None,
    )


def build_scenario(cfg: dict, st: Settings, epsilon: Optional[float] = None) -> CapScenario:
    """Assemble and validate the configured cap scenario.

    ``epsilon`` overrides the config perturbation (used by sweeps); pass 0.0
    for the unperturbed base cap.
    """
    support, _ = _support_from_config(cfg, st.n)
    spec = _cap_spec_from_config(cfg, support)
    pert_cfg = cfg.get("perturbation")
    if epsilon is not None:
        power = (cfg.get("sweep", {}) or {}).get("power",
                 (pert_cfg or {}).get("power", 3))
        pert_cfg = {"epsilon": epsilon, "power": power} if epsilon != 0.0 else None
    if pert_cfg:
        scenario = make_perturbed_cap(
            spec, PerturbationSpec(epsilon=float(pert_cfg["epsilon"]),
                                   power=int(pert_cfg.get("power", 3))))
    else:
        scenario = make_umbilical_cap(spec)
    validate_scenario(scenario)
    return scenario


def _resolved_config_echo(cfg: dict, st: Settings) -> dict:
    echo = {
        "version": 1,
        "n": st.n,
        "quadrature": {"level": st.level},
        "seed": st.seed,
        "tolerance": st.tolerance,
        "equality_tolerance": st.equality_tolerance,
    }
    for key in ("support", "cap", "perturbation", "sweep", "converge", "reilly", "samples"):
        if key in cfg:
            echo[key] = cfg[key]
    return echo


def _scenario_checks(scenario: CapScenario, st: Settings) -> dict:
    audit = hypothesis_audit(scenario, st.rule)
    checks = audit.to_dict()
    checks["admissibility"] = region_margins(scenario)
    return checks


def _all_finite(obj) -> bool:
    if isinstance(obj, dict):
        return all(_all_finite(v) for v in obj.values())
    if isinstance(obj, (list, tuple)):
        return all(_all_finite(v) for v in obj)
    if isinstance(obj, float):
        return math.isfinite(obj)
    return True


# -- subcommand runners ----------------------------------------------------------


def run_identities(cfg: dict, st: Settings) -> tuple[list, bool]:
    rows = []
    worst = 0.0
    for idx, kind in enumerate(SupportKind):
        params = CANONICAL_SUPPORT_PARAMS.get(kind.value, {})
        s = make_support(kind, st.n, **params)
        w = weight_for_support(s)
        rng = np.random.default_rng([st.seed, idx])
        interior = sample_admissible_points(s, st.samples, rng)
        on_support = sample_support_points(s, st.samples, rng)
        hess_res = hessian_identity_residual(w, interior)
        neu_res = neumann_identity_residual(w, s, on_support)
        worst = max(worst, hess_res, neu_res)
        rows.append({
            "support": kind.value,
            "model": s.model.kind.value,
            "weight": w.formula.value,
            "hessian_identity_residual": hess_res,
            "neumann_identity_residual": neu_res,
            "samples": st.samples,
        })
    return rows, worst <= st.tolerance


_MODEL_FACTORIES = (euclidean, poincare_ball, upper_half_space, sphere_stereographic)


def _model_probe_points(model, count: int, rng: np.random.Generator) -> np.ndarray:
    n = model.n
    kind = model.kind.value
    if kind == "poincare_ball":
        d = rng.normal(size=(count, n))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        return d * (0.7 * rng.uniform(0.1, 1.0, size=(count, 1)))
    pts = rng.uniform(-1.0, 1.0, size=(count, n))
    if kind == "upper_half_space":
        pts[:, -1] = rng.uniform(0.5, 2.0, size=count)
    return pts


def run_curvature(cfg: dict, st: Settings) -> tuple[dict, bool]:
    support_rows = []
    worst_umb = 0.0
    for kind in SupportKind:
        params = CANONICAL_SUPPORT_PARAMS.get(kind.value, {})
        s = make_support(kind, st.n, **params)
        res = support_umbilicity_residual(s, samples=min(st.samples, 64), seed=st.seed)
        worst_umb = max(worst_umb, res)
        support_rows.append({"support": kind.value, "kappa": s.kappa,
                             "umbilicity_residual": res})
    model_rows = []
    worst_probe = 0.0
    probe_count = min(st.samples, 100)
    for idx, factory in enumerate(_MODEL_FACTORIES):
        model = factory(st.n)
        rng = np.random.default_rng([st.seed, 100 + idx])
        pts = _model_probe_points(model, probe_count, rng)
        err = 0.0
        for p in pts:
            u, v = rng.normal(size=(2, st.n))
            err = max(err, abs(sectional_curvature_probe(model, p, u, v) - model.K))
        worst_probe = max(worst_probe, err)
        model_rows.append({"model": model.kind.value, "K": model.K,
                           "max_probe_error": err, "points": probe_count})
    # the probe itself is finite-difference limited, so it gets a wider gate
    ok = worst_umb <= st.tolerance and worst_probe <= max(st.tolerance, 1e-5)
    return {"supports": support_rows, "models": model_rows}, ok


_REPORT_FOR_COMMAND = {
    "minkowski": minkowski_report,
    "af": af_report,
    "schur": schur_report,
}


def run_inequality(command: str, cfg: dict, st: Settings) -> tuple[dict, bool]:
    scenario = build_scenario(cfg, st)
    builder = _REPORT_FOR_COMMAND[command]
    report = builder(scenario, st.rule, equality_tolerance=st.equality_tolerance)
    result = report.to_dict()
    result["scenario"] = scenario.description
    result["hypothesis_checks"] = _scenario_checks(scenario, st)
    ok = (report.relative_deficit >= -st.tolerance) and report.hypothesis_ok
    return result, ok


def run_reilly(cfg: dict, st: Settings) -> tuple[list, bool]:
    scenario = build_scenario(cfg, st)
    functions = cfg.get("reilly", {}).get("functions", ["V", "x1", "x1^2"])
    rows = []
    ok = True
    for name in functions:
        rep = reilly_residual(scenario, name, st.rule)
        rows.append(rep.to_dict())
        ok = ok and abs(rep.residual) <= st.tolerance
    return rows, ok


def run_sweep(cfg: dict, st: Settings) -> tuple[list, bool]:
    sweep_cfg = cfg.get("sweep", {})
    epsilons = [float(e) for e in sweep_cfg.get("epsilons", DEFAULT_SWEEP_EPSILONS)]
    theorem = sweep_cfg.get("theorem", "minkowski")
    builder = REPORT_BUILDERS[theorem]

    def one(eps: float) -> dict:
        scenario = build_scenario(cfg, st, epsilon=eps)
        report = builder(scenario, st.rule, equality_tolerance=st.equality_tolerance)
        audit = hypothesis_audit(scenario, st.rule)
        return {
            "epsilon": eps,
            "deficit": report.deficit,
            "relative_deficit": report.relative_deficit,
            "min_convexity_eig": audit.convexity_min,
        }

    if st.jobs == 1:
        rows = [one(eps) for eps in epsilons]
    else:
        with ThreadPoolExecutor(max_workers=st.jobs) as pool:
            rows = list(pool.map(one, epsilons))
    ok = all(r["relative_deficit"] >= -st.tolerance for r in rows)
    return rows, ok


def run_converge(cfg: dict, st: Settings) -> tuple[dict, bool]:
    conv_cfg = cfg.get("converge", {})
    levels = [int(v) for v in conv_cfg.get("levels", DEFAULT_CONVERGE_LEVELS)]
    theorem = conv_cfg.get("theorem", "minkowski")
    builder = REPORT_BUILDERS[theorem]
    scenario = build_scenario(cfg, st)
    weight = scenario.weight

    def weighted_area(level: int) -> float:
        sq = SurfaceQuadrature(scenario.surface, QuadratureRule(level))
        return sq.integral(weight.value(sq.geo.x))

    def weighted_volume(level: int) -> float:
        rq = RegionQuadrature(scenario.region, QuadratureRule(level))
        return rq.integral(weight.value(rq.points))

    tables = {
        "weighted_area": refine_study(weighted_area, levels),
        "weighted_volume": refine_study(weighted_volume, levels),
    }
    deficits = [builder(scenario, QuadratureRule(level)).deficit for level in levels]
    result = {"levels": levels, "theorem": theorem, "deficits": deficits}
    ok = True
    for name, table in tables.items():
        order = table.observed_order
        result[name] = {
            "values": table.values,
            "errors": table.errors,
            "orders": [o if math.isfinite(o) else "inf" for o in table.orders],
            "observed_order": order if math.isfinite(order) else "inf",
            "converged_value": table.converged_value,
        }
        ok = ok and order >= MIN_CONVERGENCE_ORDER
    return result, ok


# -- document assembly and entry point ---------------------------------------------


def render_json(document: dict) -> str:
    return json.dumps(document, sort_keys=True, indent=2) + "\n"


SWEEP_CSV_COLUMNS = ("epsilon", "deficit", "relative_deficit", "min_convexity_eig")


def render_sweep_csv(rows: list) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_CSV_COLUMNS)
    for row in rows:
        writer.writerow([repr(float(row[c])) for c in SWEEP_CSV_COLUMNS])
    return buf.getvalue()


def _write_output(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as e:
        raise IOFailure(f"cannot write {out}: {e}") from e


def run(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    command = args.command
    cfg = load_config(args.config)
    st = Settings(command, cfg, args)

    fmt = args.fmt or ("csv" if command == "sweep" else "json")
    if fmt == "csv" and command != "sweep":
        raise ConfigError("csv output is only available for the sweep command")

    if command == "identities":
        results, ok = run_identities(cfg, st)
    elif command == "curvature":
        results, ok = run_curvature(cfg, st)
    elif command in _REPORT_FOR_COMMAND:
        results, ok = run_inequality(command, cfg, st)
    elif command == "reilly":
        results, ok = run_reilly(cfg, st)
    elif command == "sweep":
        results, ok = run_sweep(cfg, st)
    else:
        results, ok = run_converge(cfg, st)

    if not _all_finite(results):
        ok = False

    if fmt == "csv":
        text = render_sweep_csv(results)
    else:
        document = {
            "tool": "fbmink",
            "tool_version": __version__,
            "command": command,
            "config": _resolved_config_echo(cfg, st),
            "generated_unix_time": int(time.time()),
            "results": results,
            "status": "ok" if ok else "assertion_failure",
        }
        text = render_json(document)
    _write_output(text, args.out)
    return EXIT_OK if ok else EXIT_ASSERTION


def main(argv: Optional[list] = None) -> int:
    try:
        return run(argv)
    except FbminkError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    raise SystemExit(main())
