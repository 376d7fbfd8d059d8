"""Command-line interface.

Subcommands: solve, classify, sandwich, sweep, verify.  Problem
specifications are JSON files of the form

    {
      "n": 3, "k": 1, "gamma": 0.5, "a": 1.0,
      "coefficient": {"kind": "power_tail", "l": 1.0},
      "grid": {"r_lin": 10.0, "r_max": 1e4, "nodes_per_decade": 48},
      "tolerances": {"rel": 1e-8, "abs": 1e-12}
    }

Exit codes: 0 success, 1 invalid specification, 2 integration failure,
3 inconclusive verdict or unmet precondition, 4 sandwich ordering
failure, 5 invariant suite failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import itertools
import json
import os
import sys
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from . import verify as verify_mod
from .asymptotics import expected_rate, verify_rates
from .coefficients import (RadialProfile, load_profile_csv, make_builtin_field,
                           radialize, triple_from_radial)
from .core import ProblemParams, RadialGrid, gamma_k_membership
from .criteria import (INCONCLUSIVE, classify_existence, jensen_conditions,
                       oscillation_condition, tail_exponent_of)
from .errors import (BlowupGuardError, CoefficientError, IntegrationError,
                     OrderingError, OscillationError, ParameterError)
from .sandwich import build_sandwich
from .solver import (conservation_defect, residual_max, solve_cauchy,
                     write_curve_csv)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INTEGRATION = 2
EXIT_INCONCLUSIVE = 3
EXIT_ORDERING = 4
EXIT_VERIFY = 5

JOBS_ENV = "HESSIANLS_JOBS"


# ---------------------------------------------------------------------------
# specification parsing
# ---------------------------------------------------------------------------

_RADIAL_KINDS = ("constant", "power_tail", "tabulated")
_FIELD_KINDS = ("builtin_field",)


def _need(mapping: dict, key: str, path: str):
    if key not in mapping:
        raise ParameterError(f"{path}.{key}: required field missing")
    return mapping[key]


def _as_number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParameterError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParameterError(f"{path}: expected an integer, got {value!r}")
    return value


@dataclass(frozen=True)
class ProblemSpec:
    """Validated problem specification (canonical form)."""

    params: ProblemParams
    coefficient: dict
    grid_cfg: dict
    tolerances: dict
    base_dir: str = dataclass_field(default=".", compare=False)

    @classmethod
    def from_dict(cls, raw: dict, base_dir: str = ".") -> "ProblemSpec":
        if not isinstance(raw, dict):
            raise ParameterError("spec: expected a JSON object")
        n = _as_int(_need(raw, "n", "spec"), "spec.n")
        k = _as_int(_need(raw, "k", "spec"), "spec.k")
        gamma = _as_number(_need(raw, "gamma", "spec"), "spec.gamma")
        a = _as_number(raw.get("a", 1.0), "spec.a")
        try:
            params = ProblemParams(n=n, k=k, gamma=gamma, a=a)
        except ParameterError as exc:
            raise ParameterError(f"spec: {exc}") from None
        coefficient = cls._canonical_coefficient(_need(raw, "coefficient", "spec"))
        grid_raw = raw.get("grid", {})
        if not isinstance(grid_raw, dict):
            raise ParameterError("spec.grid: expected an object")
        grid_cfg = {
            "r_lin": _as_number(grid_raw.get("r_lin", 10.0), "spec.grid.r_lin"),
            "r_max": _as_number(grid_raw.get("r_max", 1e4), "spec.grid.r_max"),
            "nodes_per_decade": _as_int(grid_raw.get("nodes_per_decade", 48),
                                        "spec.grid.nodes_per_decade"),
        }
        if grid_cfg["r_max"] <= 0:
            raise ParameterError("spec.grid.r_max: must be positive")
        tol_raw = raw.get("tolerances", {})
        if not isinstance(tol_raw, dict):
            raise ParameterError("spec.tolerances: expected an object")
        tolerances = {
            "rel": _as_number(tol_raw.get("rel", 1e-8), "spec.tolerances.rel"),
            "abs": _as_number(tol_raw.get("abs", 1e-12), "spec.tolerances.abs"),
        }
        return cls(params=params, coefficient=coefficient, grid_cfg=grid_cfg,
                   tolerances=tolerances, base_dir=base_dir)

    _COEFF_KEYS = {
        "constant": {"kind", "value"},
        "power_tail": {"kind", "l", "m", "A", "r0", "scale"},
        "tabulated": {"kind", "path", "tail_exponent"},
        "builtin_field": {"kind", "name", "l", "m", "amp", "dim"},
    }

    @classmethod
    def _canonical_coefficient(cls, raw) -> dict:
        if not isinstance(raw, dict):
            raise ParameterError("spec.coefficient: expected an object")
        kind = _need(raw, "kind", "spec.coefficient")
        allowed = cls._COEFF_KEYS.get(kind)
        if allowed is not None:
            extra = sorted(set(raw) - allowed)
            if extra:
                raise ParameterError(
                    f"spec.coefficient.{extra[0]}: not a parameter of kind {kind!r}")
        if kind == "constant":
            return {"kind": "constant",
                    "value": _as_number(raw.get("value", 1.0),
                                        "spec.coefficient.value")}
        if kind == "power_tail":
            out = {"kind": "power_tail",
                   "l": _as_number(_need(raw, "l", "spec.coefficient"),
                                   "spec.coefficient.l"),
                   "A": _as_number(raw.get("A", 0.0), "spec.coefficient.A"),
                   "r0": _as_number(raw.get("r0", 1.0), "spec.coefficient.r0"),
                   "scale": _as_number(raw.get("scale", 1.0),
                                       "spec.coefficient.scale")}
            if out["A"] != 0.0 or "m" in raw:
                out["m"] = _as_number(_need(raw, "m", "spec.coefficient"),
                                      "spec.coefficient.m")
            return out
        if kind == "tabulated":
            out = {"kind": "tabulated",
                   "path": str(_need(raw, "path", "spec.coefficient"))}
            if raw.get("tail_exponent") is not None:
                out["tail_exponent"] = _as_number(raw["tail_exponent"],
                                                  "spec.coefficient.tail_exponent")
            return out
        if kind == "builtin_field":
            name = str(_need(raw, "name", "spec.coefficient"))
            out = {"kind": "builtin_field", "name": name}
            if name == "anisotropic_power":
                out["l"] = _as_number(_need(raw, "l", "spec.coefficient"),
                                      "spec.coefficient.l")
                out["m"] = _as_number(_need(raw, "m", "spec.coefficient"),
                                      "spec.coefficient.m")
                out["amp"] = _as_number(raw.get("amp", 1.0), "spec.coefficient.amp")
                out["dim"] = _as_int(raw.get("dim", 3), "spec.coefficient.dim")
            elif name != "counterexample":
                raise ParameterError(f"spec.coefficient.name: unknown builtin "
                                     f"field {name!r}")
            return out
        raise ParameterError(f"spec.coefficient.kind: unknown kind {kind!r} "
                             f"(expected one of {_RADIAL_KINDS + _FIELD_KINDS})")

    def to_dict(self) -> dict:
        return {
            "n": self.params.n,
            "k": self.params.k,
            "gamma": self.params.gamma,
            "a": self.params.a,
            "coefficient": dict(self.coefficient),
            "grid": dict(self.grid_cfg),
            "tolerances": dict(self.tolerances),
        }

    def grid(self) -> RadialGrid:
        return RadialGrid.build(self.grid_cfg["r_max"], self.grid_cfg["r_lin"],
                                self.grid_cfg["nodes_per_decade"])

    def is_radial(self) -> bool:
        return self.coefficient["kind"] in _RADIAL_KINDS

    def radial_profile(self) -> RadialProfile:
        c = self.coefficient
        kind = c["kind"]
        if kind == "constant":
            return RadialProfile.constant(c["value"])
        if kind == "power_tail":
            return RadialProfile.power_tail(l=c["l"], m=c.get("m"), A=c["A"],
                                            r0=c["r0"], scale=c["scale"])
        if kind == "tabulated":
            path = c["path"]
            if not os.path.isabs(path):
                path = os.path.join(self.base_dir, path)
            return load_profile_csv(path, tail_exponent=c.get("tail_exponent"))
        raise ParameterError(f"spec.coefficient: kind {kind!r} is not a radial "
                             f"profile; use classify/sandwich for fields")

    def make_field(self):
        c = dict(self.coefficient)
        kind = c.pop("kind")
        if kind != "builtin_field":
            raise ParameterError("spec.coefficient: not a non-radial field")
        name = c.pop("name")
        fieldobj = make_builtin_field(name, **c)
        if getattr(fieldobj, "dim", None) != self.params.n:
            raise ParameterError(
                f"spec.coefficient: field dimension {getattr(fieldobj, 'dim', None)} "
                f"does not match n = {self.params.n}")
        return fieldobj

    def triple(self, sphere_count: int = 256):
        if self.is_radial():
            return triple_from_radial(self.radial_profile())
        return radialize(self.make_field(), self.grid(), sphere_count=sphere_count)


def load_spec(path) -> ProblemSpec:
    try:
        with open(path) as handle:
            raw = json.load(handle)
    except FileNotFoundError:
        raise ParameterError(f"spec file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ParameterError(f"spec file {path} is not valid JSON: {exc}") from None
    return ProblemSpec.from_dict(raw, base_dir=os.path.dirname(os.path.abspath(path)))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _out_path(args_out, spec_path, suffix):
    if args_out:
        return args_out
    stem, _ = os.path.splitext(spec_path)
    return stem + suffix


def cmd_solve(args) -> int:
    spec = load_spec(args.spec)
    if not spec.is_radial():
        raise ParameterError("spec.coefficient: solve needs a radial coefficient "
                             "(constant, power_tail or tabulated)")
    profile = spec.radial_profile()
    grid = spec.grid()
    curve = solve_cauchy(spec.params, profile, grid,
                         rel_tol=spec.tolerances["rel"],
                         abs_tol=spec.tolerances["abs"])
    curve_path = _out_path(args.curve, args.spec, "_curve.csv")
    write_curve_csv(curve, curve_path, spec.params, profile)
    summary = {
        "r_max": grid.r_max,
        "u_at_rmax": float(curve.u[-1]),
        "gamma_k_ok": bool(np.all(gamma_k_membership(curve, spec.params))),
        "residual_max": residual_max(curve, spec.params, profile),
        "conservation_defect": conservation_defect(curve, spec.params, profile),
        "curve_csv": curve_path,
    }
    summary_path = _out_path(args.summary, args.spec, "_summary.json")
    with open(summary_path, "w") as handle:
        json.dump(summary, handle, indent=2)
    if args.plot_data:
        plot_path = _out_path(None, args.spec, "_plotdata.csv")
        with open(plot_path, "w", newline="") as handle:
            handle.write("r,series,value\n")
            for name, vals in (("u", curve.u), ("du", curve.du), ("d2u", curve.d2u)):
                for r, v in zip(grid.nodes, vals):
                    handle.write(f"{r:.17g},{name},{v:.17g}\n")
        summary["plot_data_csv"] = plot_path
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_classify(args) -> int:
    spec = load_spec(args.spec)
    triple = spec.triple(sphere_count=args.sphere_count)
    verdict = classify_existence(triple.b_star, spec.params,
                                 r_max=spec.grid_cfg["r_max"])
    osc = oscillation_condition(triple, spec.params, r_max=spec.grid_cfg["r_max"])
    jensen = jensen_conditions(triple, spec.params, r_max=spec.grid_cfg["r_max"])
    est_star = tail_exponent_of(triple.b_star)
    thresholds = {
        "l": None if est_star is None else est_star.exponent,
        "m": osc.tail_osc,
        "m_star": osc.m_star,
        "existence_threshold": 2.0 * spec.params.k,
    }
    payload = {
        "existence_verdict": verdict.to_dict(),
        "osc_condition": osc.to_dict(),
        "thresholds": thresholds,
        "moment_conditions": jensen.to_dict(),
    }
    text = json.dumps(payload, indent=2)
    print(text)
    if args.out:
        with open(args.out, "w") as handle:
            handle.write(text + "\n")
    if args.strict and (verdict.verdict == INCONCLUSIVE or osc.status == "inconclusive"):
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_sandwich(args) -> int:
    spec = load_spec(args.spec)
    triple = spec.triple(sphere_count=args.sphere_count)
    grid = spec.grid()
    report = build_sandwich(triple, spec.params, grid, beta=args.beta,
                            margin=args.margin,
                            rel_tol=spec.tolerances["rel"],
                            abs_tol=spec.tolerances["abs"])
    out_dir = args.out or _out_path(None, args.spec, "_sandwich")
    payload = report.save(out_dir, triple)
    print(json.dumps(payload, indent=2))
    return EXIT_OK


def cmd_verify(args) -> int:
    results = verify_mod.run_all()
    failed = [r for r in results if not r.passed]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.name}: {r.detail}")
    print(f"{len(results) - len(failed)}/{len(results)} invariants passed")
    if args.json:
        with open(args.json, "w") as handle:
            json.dump([r.to_dict() for r in results], handle, indent=2)
    return EXIT_OK if not failed else EXIT_VERIFY


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

_TOP_LEVEL_VARY = ("n", "k", "gamma", "a")
_COEFF_VARY = ("l", "m", "A", "amp", "r0", "scale", "value")
_GRID_VARY = ("r_max", "nodes_per_decade")

_SWEEP_COLUMNS = ("n", "k", "gamma", "a", "kind", "l", "m", "verdict",
                  "osc_status", "m_star", "alpha_expected", "alpha_fitted",
                  "fit_stderr", "amplitude_ratio", "error")


def _apply_override(raw: dict, name: str, value: float) -> dict:
    out = json.loads(json.dumps(raw))
    if name in _TOP_LEVEL_VARY:
        out[name] = int(value) if name in ("n", "k") else value
    elif name in _COEFF_VARY:
        out.setdefault("coefficient", {})[name] = value
    elif name in _GRID_VARY:
        out.setdefault("grid", {})[name] = (int(value) if name == "nodes_per_decade"
                                            else value)
    else:
        raise ParameterError(f"--vary {name}: unknown parameter (allowed: "
                             f"{_TOP_LEVEL_VARY + _COEFF_VARY + _GRID_VARY})")
    return out


def _sweep_cell(payload):
    raw, base_dir, fit_rates = payload
    row = {col: "" for col in _SWEEP_COLUMNS}
    try:
        spec = ProblemSpec.from_dict(raw, base_dir=base_dir)
        row.update({"n": spec.params.n, "k": spec.params.k,
                    "gamma": spec.params.gamma, "a": spec.params.a,
                    "kind": spec.coefficient["kind"],
                    "l": spec.coefficient.get("l", ""),
                    "m": spec.coefficient.get("m", "")})
        triple = spec.triple(sphere_count=64)
        verdict = classify_existence(triple.b_star, spec.params,
                                     r_max=spec.grid_cfg["r_max"])
        osc = oscillation_condition(triple, spec.params,
                                    r_max=spec.grid_cfg["r_max"])
        row["verdict"] = verdict.verdict
        row["osc_status"] = osc.status
        row["m_star"] = "" if osc.m_star is None else f"{osc.m_star:.17g}"
        est = tail_exponent_of(triple.b_star)
        if (fit_rates and verdict.verdict == "Large" and spec.is_radial()
                and est is not None and est.exponent <= spec.params.k - 1):
            alpha = expected_rate(spec.params, est.exponent)
            row["alpha_expected"] = f"{alpha:.17g}"
            curve = solve_cauchy(spec.params, spec.radial_profile(), spec.grid(),
                                 rel_tol=spec.tolerances["rel"],
                                 abs_tol=spec.tolerances["abs"])
            rates = verify_rates(curve, spec.params, est.exponent)
            if "u" in rates.fits:
                row["alpha_fitted"] = f"{rates.fits['u'].exponent:.17g}"
                row["fit_stderr"] = f"{rates.fits['u'].stderr:.17g}"
            row["amplitude_ratio"] = f"{rates.amplitude_ratio:.17g}"
    except Exception as exc:  # noqa: BLE001 - per-cell failures stay in-row
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _parse_vary(items):
    out = []
    for item in items or []:
        if "=" not in item:
            raise ParameterError(f"--vary {item!r}: expected name=v1,v2,...")
        name, _, values = item.partition("=")
        name = name.strip()
        try:
            vals = [float(v) for v in values.split(",") if v.strip() != ""]
        except ValueError:
            raise ParameterError(f"--vary {item!r}: values must be numbers") from None
        if not vals:
            raise ParameterError(f"--vary {item!r}: no values given")
        out.append((name, vals))
    return out


def _job_count(args_jobs) -> int:
    env = os.environ.get(JOBS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ParameterError(f"{JOBS_ENV}={env!r}: expected an integer") from None
    return max(1, args_jobs or 1)


def cmd_sweep(args) -> int:
    spec_path = args.spec
    try:
        with open(spec_path) as handle:
            raw = json.load(handle)
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        raise ParameterError(f"spec template {spec_path}: {exc}") from None
    ProblemSpec.from_dict(raw, base_dir=os.path.dirname(os.path.abspath(spec_path)))
    vary = _parse_vary(args.vary)
    base_dir = os.path.dirname(os.path.abspath(spec_path))
    combos = list(itertools.product(*[vals for _, vals in vary])) if vary else [()]
    payloads = []
    for combo in combos:
        cell = raw
        for (name, _), value in zip(vary, combo):
            cell = _apply_override(cell, name, value)
        payloads.append((cell, base_dir, not args.no_rates))
    jobs = _job_count(args.jobs)
    if jobs > 1 and len(payloads) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_cell, payloads))
    else:
        rows = [_sweep_cell(p) for p in payloads]
    lines = [",".join(_SWEEP_COLUMNS)]
    for row in rows:
        lines.append(",".join(str(row[col]) for col in _SWEEP_COLUMNS))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hessianls",
        description="Radial k-Hessian Cauchy solver and growth classification")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="integrate the radial Cauchy problem")
    p_solve.add_argument("spec")
    p_solve.add_argument("--curve", default=None, help="output CSV path")
    p_solve.add_argument("--summary", default=None, help="output JSON path")
    p_solve.add_argument("--plot-data", action="store_true",
                         help="also write a long-format CSV for plotting")
    p_solve.set_defaults(func=cmd_solve)

    p_classify = sub.add_parser("classify", help="Large/Bounded classification")
    p_classify.add_argument("spec")
    p_classify.add_argument("--out", default=None, help="also write JSON here")
    p_classify.add_argument("--strict", action="store_true",
                            help="exit 3 on any inconclusive verdict")
    p_classify.add_argument("--sphere-count", type=int, default=256)
    p_classify.set_defaults(func=cmd_classify)

    p_sand = sub.add_parser("sandwich", help="build the sub/supersolution pair")
    p_sand.add_argument("spec")
    p_sand.add_argument("--out", default=None, help="output directory")
    p_sand.add_argument("--beta", type=float, default=None,
                        help="explicit supersolution center (skips the "
                             "oscillation precondition)")
    p_sand.add_argument("--margin", type=float, default=None)
    p_sand.add_argument("--sphere-count", type=int, default=256)
    p_sand.set_defaults(func=cmd_sandwich)

    p_sweep = sub.add_parser("sweep", help="classification table over parameter "
                                           "ranges")
    p_sweep.add_argument("spec", help="template spec JSON")
    p_sweep.add_argument("--vary", action="append", default=[],
                         metavar="NAME=V1,V2,...",
                         help="parameter range; repeatable")
    p_sweep.add_argument("--out", default=None, help="output CSV (default stdout)")
    p_sweep.add_argument("--jobs", type=int, default=1,
                         help=f"parallel workers (env {JOBS_ENV} overrides)")
    p_sweep.add_argument("--no-rates", action="store_true",
                         help="skip the solve-based rate fits")
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the invariant suite")
    p_verify.add_argument("--json", default=None, help="write machine summary here")
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, CoefficientError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (BlowupGuardError, IntegrationError) as exc:
        print(f"integration error: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    except OscillationError as exc:
        print(f"precondition not met: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except OrderingError as exc:
        print(f"ordering failure: {exc}", file=sys.stderr)
        return EXIT_ORDERING


def console_main() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    console_main()
