"""Command-line front end.

Commands: ``scgf`` (SCGF scan to CSV), ``doob-build`` (emit the transformed
model as a model JSON file), ``sample`` (quantum-jump Monte Carlo with a
JSONL trajectory log and a summary), ``verify`` (symmetry, similarity and
fluctuation-relation checks with a JSON report) and ``example`` (export a
built-in model).

Exit codes: 0 success, 1 a verification check failed, 2 model/input problem,
3 spectral solver failure, 4 symmetry precondition failure, 5 sampler
failure. QJF_THREADS caps sampling parallelism. All floats are printed with
17 significant digits; file writes are atomic (temp file + rename).
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .doob import doob_transform, verify_fluctuation_relation, verify_similarity
from .errors import (
    ConsistencyError,
    DegenerateDominantEigenvalueError,
    EigenSolveError,
    GridPairingError,
    ModelValidationError,
    NonRealDominantEigenvalueError,
    NormUnderflowError,
    NotPositiveDefiniteError,
    OutOfValidityDomainError,
    QjfError,
    SamplerError,
    ZeroTraceRightError,
)
from .grids import GridSpec, centered_grid, exact_number
from .io import SCHEMA_VERSION, atomic_write_text, bundle_to_dict, dump_json, load_model
from .lindblad import tilted_generator
from .models import EXAMPLE_BUILDERS, ModelBundle, build_example
from .spectral import scgf_scan, solve_scgf, theta_gradient
from .symmetry import (
    check_dynamics_symmetry,
    check_tilted_symmetry,
    weight_compatibility_residual,
)
from .trajectories import estimate_scgf, sample_ensemble

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_MODEL_ERROR = 2
EXIT_SOLVER_ERROR = 3
EXIT_SYMMETRY_PRECONDITION = 4
EXIT_SAMPLER_ERROR = 5

_SOLVER_ERRORS = (DegenerateDominantEigenvalueError, ZeroTraceRightError,
                  NonRealDominantEigenvalueError, EigenSolveError,
                  NotPositiveDefiniteError, ConsistencyError)
_SAMPLER_ERRORS = (SamplerError, NormUnderflowError)

# --tol NAME=VALUE destinations: scgf solves, the Doob transform, and the
# pass thresholds of the verify pipeline
_SCGF_TOL_KEYS = {"degeneracy": "degeneracy_tol", "imag": "imag_tol",
                  "herm": "herm_tol", "residual": "residual_tol",
                  "trace": "trace_tol"}
_DOOB_TOL_KEYS = {"pd": "pd_tol", "consistency": "consistency_tol", "dual": "dual_tol"}
_CHECK_TOL_KEYS = {"dynamics", "tilted", "similarity", "fr"}
_CHECK_TOL_DEFAULTS = {"dynamics": 1e-10, "tilted": 1e-8, "similarity": 1e-8, "fr": 1e-8}


class _CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _emit(text: str, out_path) -> None:
    if out_path:
        atomic_write_text(out_path, text)
    else:
        sys.stdout.write(text)


def _parse_params(items) -> dict:
    params = {}
    for item in items or ():
        if "=" not in item:
            raise _CliError(EXIT_MODEL_ERROR, f"--param {item!r} is not of the form k=v")
        key, value = item.split("=", 1)
        try:
            params[key] = int(value)
        except ValueError:
            try:
                params[key] = float(value)
            except ValueError:
                raise _CliError(EXIT_MODEL_ERROR,
                                f"--param {key}: cannot parse {value!r}") from None
    return params


def _load_bundle(args) -> ModelBundle:
    if getattr(args, "model", None) and getattr(args, "example", None):
        raise _CliError(EXIT_MODEL_ERROR, "give either --model or --example, not both")
    try:
        if getattr(args, "model", None):
            return load_model(args.model)
        if getattr(args, "example", None):
            return build_example(args.example, **_parse_params(args.param))
    except (ModelValidationError, OutOfValidityDomainError, KeyError, TypeError,
            OSError, ValueError) as exc:
        raise _CliError(EXIT_MODEL_ERROR, f"cannot load model: {exc}") from exc
    raise _CliError(EXIT_MODEL_ERROR, "one of --model or --example is required")


def _parse_tols(items) -> tuple[dict, dict, dict]:
    scgf_kw, doob_kw, check = {}, {}, dict(_CHECK_TOL_DEFAULTS)
    for item in items or ():
        if "=" not in item:
            raise _CliError(EXIT_MODEL_ERROR, f"--tol {item!r} is not of the form name=value")
        name, value = item.split("=", 1)
        try:
            value = float(value)
        except ValueError:
            raise _CliError(EXIT_MODEL_ERROR, f"--tol {name}: bad value {value!r}") from None
        if name in _SCGF_TOL_KEYS:
            scgf_kw[_SCGF_TOL_KEYS[name]] = value
        elif name in _DOOB_TOL_KEYS:
            doob_kw[_DOOB_TOL_KEYS[name]] = value
        elif name in _CHECK_TOL_KEYS:
            check[name] = value
        else:
            known = sorted(_SCGF_TOL_KEYS | _DOOB_TOL_KEYS.keys() | _CHECK_TOL_KEYS)
            raise _CliError(EXIT_MODEL_ERROR, f"unknown --tol name {name!r}; known: {known}")
    return scgf_kw, doob_kw, check


def _parse_grid(text: str) -> GridSpec:
    try:
        return GridSpec.parse(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise _CliError(EXIT_MODEL_ERROR, f"bad --grid: {exc}") from exc


def _parse_s_list(text: str) -> list[Fraction]:
    try:
        values = [exact_number(part.strip()) for part in text.split(",") if part.strip()]
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise _CliError(EXIT_MODEL_ERROR, f"bad --s: {exc}") from exc
    if not values:
        raise _CliError(EXIT_MODEL_ERROR, "--s needs at least one value")
    return values


def _require_scalar_observable(bundle: ModelBundle, what: str) -> None:
    if bundle.observable.m != 1:
        raise _CliError(EXIT_MODEL_ERROR,
                        f"{what} supports scalar observables only (m = 1); "
                        f"model has m = {bundle.observable.m}")


# ---------------------------------------------------------------------------
# scgf

def _cmd_scgf(args) -> int:
    bundle = _load_bundle(args)
    _require_scalar_observable(bundle, "scgf --grid")
    grid = _parse_grid(args.grid)
    scgf_kw, _, _ = _parse_tols(args.tol)
    points = scgf_scan(bundle.model, bundle.observable,
                       [float(p) for p in grid.points()], **scgf_kw)
    m = bundle.observable.m
    header = ",".join([f"lambda_{i + 1}" for i in range(m)] + ["theta", "gap", "status"])
    lines = [header]
    for p in points:
        cells = [_fmt(c) for c in p.lam]
        cells += [_fmt(p.theta), _fmt(p.gap), p.status]
        lines.append(",".join(cells))
    _emit("\n".join(lines) + "\n", args.out)
    if args.gnuplot:
        if not args.out:
            raise _CliError(EXIT_MODEL_ERROR, "--gnuplot requires --out")
        atomic_write_text(args.gnuplot, _gnuplot_script(args.out))
    return EXIT_OK if all(p.ok for p in points) else EXIT_SOLVER_ERROR


def _gnuplot_script(csv_path) -> str:
    return (
        "set datafile separator ','\n"
        "set key left top\n"
        "set xlabel 'lambda'\n"
        "set ylabel 'theta'\n"
        f"plot '{csv_path}' every ::1 using 1:2 with linespoints title 'theta(lambda)'\n"
    )


# ---------------------------------------------------------------------------
# doob-build

def _cmd_doob_build(args) -> int:
    bundle = _load_bundle(args)
    s_values = _parse_s_list(args.s)
    if len(s_values) != 1:
        raise _CliError(EXIT_MODEL_ERROR, "doob-build takes a single --s value")
    scgf_kw, doob_kw, _ = _parse_tols(args.tol)
    s = float(s_values[0])
    try:
        doob = doob_transform(bundle.model, bundle.observable, s, **doob_kw, **scgf_kw)
    except _SOLVER_ERRORS as exc:
        raise _CliError(EXIT_SOLVER_ERROR, f"doob transform failed: {exc}") from exc
    out_bundle = ModelBundle(
        name=f"{bundle.name}-doob-s={args.s}",
        model=doob.model,
        observable=bundle.observable,
        symmetry=None,  # the transform deliberately breaks the jump symmetry
        psi0=bundle.psi0,
    )
    _emit(dump_json(bundle_to_dict(out_bundle)) + "\n", args.out)
    print(f"theta(s) = {_fmt(doob.theta)}  gap = {_fmt(doob.spectral.gap)}",
          file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# sample

def _cmd_sample(args) -> int:
    bundle = _load_bundle(args)
    if args.n < 1:
        raise _CliError(EXIT_MODEL_ERROR, "--n must be >= 1")
    if args.horizon <= 0:
        raise _CliError(EXIT_MODEL_ERROR, "--horizon must be positive")
    if not 0 <= args.seed < 2**64:
        raise _CliError(EXIT_MODEL_ERROR, "--seed must fit in an unsigned 64-bit integer")
    scgf_kw, doob_kw, _ = _parse_tols(args.tol)
    sample_model = bundle.model
    doob_s = None
    if args.doob is not None:
        doob_s = float(exact_number(args.doob))
        try:
            sample_model = doob_transform(bundle.model, bundle.observable, doob_s,
                                          **doob_kw, **scgf_kw).model
        except _SOLVER_ERRORS as exc:
            raise _CliError(EXIT_SOLVER_ERROR, f"doob transform failed: {exc}") from exc
    try:
        stats = sample_ensemble(sample_model, args.n, args.horizon, args.seed,
                                psi0=bundle.psi0)
    except _SAMPLER_ERRORS as exc:
        raise _CliError(EXIT_SAMPLER_ERROR, f"sampling failed: {exc}") from exc

    k = stats.k_samples(bundle.observable)
    if args.out:
        lines = []
        for i in range(stats.n_traj):
            record = {
                "seed": int(stats.traj_seeds[i]),
                "n_jumps": int(stats.counts[i].sum()),
                "counts": [int(c) for c in stats.counts[i]],
                "K": [float(x) for x in k[i]],
            }
            lines.append(dump_json(record, indent=None))
        atomic_write_text(args.out, "\n".join(lines) + "\n")

    summary = _sample_summary(bundle, stats, k, args, doob_s, scgf_kw)
    text = dump_json(summary) + "\n"
    if args.summary:
        atomic_write_text(args.summary, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _sample_summary(bundle, stats, k, args, doob_s, scgf_kw) -> dict:
    t = stats.horizon
    rate = k / t
    mean_rate = rate.mean(axis=0)
    stderr = (rate.std(axis=0, ddof=1) / np.sqrt(stats.n_traj)
              if stats.n_traj > 1 else np.full(rate.shape[1], np.nan))
    summary = {
        "schema_version": SCHEMA_VERSION,
        "model": bundle.name,
        "doob_s": doob_s,
        "n_traj": int(stats.n_traj),
        "horizon": float(t),
        "seed": int(stats.seed),
        "channel_mean_counts": [float(x) for x in stats.channel_mean],
        "mean_rate": {
            "empirical": [float(x) for x in mean_rate],
            "stderr": [float(x) for x in stderr],
        },
    }
    # spectral reference for the mean rate, when solvable at this size
    try:
        shift = np.zeros(bundle.observable.m) if doob_s is None else doob_s
        grad = theta_gradient(bundle.model, bundle.observable, at=shift, **scgf_kw)
        summary["mean_rate"]["spectral"] = [float(-g) for g in grad]
    except (QjfError, ValueError):
        summary["mean_rate"]["spectral"] = None

    if args.grid:
        grid = _parse_grid(args.grid)
        _require_scalar_observable(bundle, "sample --grid")
        table = []
        for point in grid.points():
            lam = float(point)
            est = (estimate_scgf(stats, bundle.observable, lam)
                   if stats.n_traj > 1 else None)
            row = {
                "lambda": [lam],
                "theta_hat": None if est is None else est.theta_hat,
                "stderr": None if est is None else est.stderr,
                "theta_spectral": None,
            }
            try:
                theta = solve_scgf(bundle.model, bundle.observable,
                                   (lam + doob_s) if doob_s else lam, **scgf_kw).theta
                if doob_s:
                    theta -= solve_scgf(bundle.model, bundle.observable, doob_s,
                                        **scgf_kw).theta
                row["theta_spectral"] = float(theta)
                if est is not None:
                    row["abs_error"] = abs(est.theta_hat - theta)
            except QjfError:
                pass
            table.append(row)
        summary["scgf_estimates"] = table
    return summary


# ---------------------------------------------------------------------------
# verify

def _cmd_verify(args) -> int:
    bundle = _load_bundle(args)
    if bundle.symmetry is None:
        raise _CliError(EXIT_SYMMETRY_PRECONDITION,
                        "model carries no symmetry block; nothing to verify")
    sym = bundle.symmetry
    scgf_kw, doob_kw, check = _parse_tols(args.tol)
    s_values = _parse_s_list(args.s)
    lam_probe = float(exact_number(args.probe_lambda))

    report: dict = {"schema_version": SCHEMA_VERSION, "model": bundle.name}
    weight_res = weight_compatibility_residual(sym, bundle.observable)
    dyn = check_dynamics_symmetry(bundle.model, sym, tol=check["dynamics"])
    report["dynamics_symmetry"] = {
        "hamiltonian_residual": dyn.hamiltonian_residual,
        "jump_residual": dyn.jump_residual,
        "rate_residual": max(dyn.rate_residuals, default=0.0),
        "weight_residual": weight_res,
        "tol": check["dynamics"],
        "pass": bool(dyn.passed and weight_res <= 1e-12),
    }
    # the tilted-generator identity is the precondition every later check rests on
    tilted_res = check_tilted_symmetry(bundle.model, bundle.observable, sym, lam_probe)
    report["tilted_symmetry"] = {
        "lambda": [lam_probe],
        "residual": tilted_res,
        "tol": check["tilted"],
        "pass": bool(tilted_res <= check["tilted"]),
    }
    precondition_ok = report["dynamics_symmetry"]["pass"] and report["tilted_symmetry"]["pass"]

    similarity_blocks = []
    fr_blocks = []
    if precondition_ok:
        try:
            for s in s_values:
                sim = verify_similarity(bundle.model, bundle.observable, sym,
                                        float(s), lam_probe, tol=check["similarity"],
                                        dynamics_tol=check["dynamics"],
                                        **doob_kw, **scgf_kw)
                similarity_blocks.append({
                    "s": [float(s)],
                    "lambda": [float(x) for x in sim.lam],
                    "lambda_mapped": [float(x) for x in sim.lam_mapped],
                    "residual": sim.residual,
                    "tol": check["similarity"],
                    "pass": bool(sim.passed),
                })
                grid = (_parse_grid(args.grid) if args.grid
                        else centered_grid(-s, args.grid_half_width, args.grid_step))
                fr = verify_fluctuation_relation(
                    bundle.model, bundle.observable, sym.u, s, grid,
                    tol=check["fr"], **scgf_kw)
                fr_blocks.append({
                    "s": list(fr.s),
                    "U": [list(row) for row in fr.u],
                    "grid": [list(p) for p in fr.grid],
                    "max_residual": fr.max_residual,
                    "tol": check["fr"],
                    "pass": bool(fr.passed),
                    "pairs": [
                        {"lambda": list(p.lam), "lambda_mapped": list(p.lam_mapped),
                         "theta": p.theta, "theta_mapped": p.theta_mapped}
                        for p in fr.pairs
                    ],
                })
        except GridPairingError as exc:
            raise _CliError(EXIT_MODEL_ERROR, f"grid pairing failed: {exc}") from exc
        except _SOLVER_ERRORS as exc:
            raise _CliError(EXIT_SOLVER_ERROR, f"verification solve failed: {exc}") from exc
    report["similarity"] = similarity_blocks
    report["fluctuation_relation"] = fr_blocks
    checks_ok = (all(b["pass"] for b in similarity_blocks)
                 and all(b["pass"] for b in fr_blocks))
    report["pass"] = bool(precondition_ok and checks_ok)
    _emit(dump_json(report) + "\n", args.out)
    if not precondition_ok:
        return EXIT_SYMMETRY_PRECONDITION
    return EXIT_OK if checks_ok else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# example

def _cmd_example(args) -> int:
    try:
        bundle = build_example(args.name, **_parse_params(args.param))
    except (KeyError, TypeError, OutOfValidityDomainError) as exc:
        raise _CliError(EXIT_MODEL_ERROR, f"cannot build example: {exc}") from exc
    if args.emit_json:
        _emit(dump_json(bundle_to_dict(bundle)) + "\n", args.out)
    else:
        info = (f"{bundle.name}: dim={bundle.model.dim} "
                f"channels={bundle.model.n_channels} "
                f"observable_m={bundle.observable.m} "
                f"symmetry={'yes' if bundle.symmetry else 'no'}")
        print(info)
    return EXIT_OK


# ---------------------------------------------------------------------------

def _add_model_args(sub):
    sub.add_argument("--model", help="model-definition JSON file")
    sub.add_argument("--example", choices=sorted(EXAMPLE_BUILDERS),
                     help="built-in example id")
    sub.add_argument("--param", action="append", metavar="K=V",
                     help="builder parameter (repeatable)")
    sub.add_argument("--tol", action="append", metavar="NAME=VALUE",
                     help="tolerance override (repeatable)")
    sub.add_argument("--out", help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qjf",
        description="Jump-counting statistics of Markovian open quantum systems.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("scgf", help="scan the SCGF over a tilt grid (CSV)")
    _add_model_args(p)
    p.add_argument("--grid", required=True, metavar="START:STEP:COUNT")
    p.add_argument("--gnuplot", help="also write a gnuplot script to this path")
    p.set_defaults(func=_cmd_scgf)

    p = subs.add_parser("doob-build", help="emit the Doob-transformed model as JSON")
    _add_model_args(p)
    p.add_argument("--s", required=True, help="biasing field value")
    p.set_defaults(func=_cmd_doob_build)

    p = subs.add_parser("sample", help="quantum-jump Monte Carlo sampling")
    _add_model_args(p)
    p.add_argument("--n", type=int, default=1000, help="number of trajectories")
    p.add_argument("--horizon", type=float, default=10.0)
    p.add_argument("--seed", type=lambda v: int(v, 0), default=0, metavar="U64")
    p.add_argument("--doob", metavar="S", help="sample the Doob dynamics at bias S")
    p.add_argument("--grid", metavar="START:STEP:COUNT",
                   help="tilt grid for the empirical SCGF table")
    p.add_argument("--summary", help="write the summary JSON here instead of stdout")
    p.set_defaults(func=_cmd_sample)

    p = subs.add_parser("verify", help="symmetry / similarity / fluctuation-relation checks")
    _add_model_args(p)
    p.add_argument("--s", default="0.25,0.5,1.0", metavar="VALUE[,VALUE...]")
    p.add_argument("--probe-lambda", default="0.3", metavar="VALUE",
                   help="tilt used for the generator-symmetry and similarity checks")
    p.add_argument("--grid", metavar="START:STEP:COUNT",
                   help="explicit tilt grid (must be closed under the pairing map)")
    p.add_argument("--grid-half-width", default="1.0", metavar="W",
                   help="half width of the auto grid centred at -s")
    p.add_argument("--grid-step", default="0.1", metavar="H")
    p.set_defaults(func=_cmd_verify)

    p = subs.add_parser("example", help="inspect or export a built-in example")
    p.add_argument("name", choices=sorted(EXAMPLE_BUILDERS))
    p.add_argument("--param", action="append", metavar="K=V")
    p.add_argument("--emit-json", action="store_true")
    p.add_argument("--out", help="output path (default: stdout)")
    p.set_defaults(func=_cmd_example)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _CliError as exc:
        print(f"qjf: error: {exc}", file=sys.stderr)
        return exc.code
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
