"""``dnls-lab`` command line.

Exit codes: 0 success, 1 failed verdict, 2 usage error, 3 solver failure.
Every output directory receives one ``manifest.json``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import io as lab_io
from .diagnostics import CSV_COLUMNS, energy_E, mass, momentum_P
from .errors import DnlsLabError, SolverFailure
from .evolve import EvolutionProblem, Status, evolve
from .experiments import (
    DEFAULTS,
    GAUGE_TOLERANCES,
    ExperimentConfig,
    ExperimentName,
    gauge_identity_errors,
    run_experiment,
)
from .grid import GridSpec
from .ground_state import elliptic_residual, gn_functional, ground_state
from .initial import from_descriptor, random_field
from .modulation import fit_state

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_USAGE = 2
EXIT_SOLVER = 3

INIT_HELP = (
    'initial condition as JSON, e.g. \'{"kind": "gaussian", "amplitude": 1.3, "wavenumber": 0.8}\'; '
    "kinds: ground_state, gaussian, bump, halfline_profile, halfline_fixture, threshold, random, zero"
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _grid(args) -> GridSpec:
    if args.domain == "line":
        return GridSpec.line(args.L if args.L is not None else 30.0, args.n if args.n is not None else 1024)
    return GridSpec.halfline(args.L if args.L is not None else 10.0, args.n if args.n is not None else 4001)


def _json_arg(text: str, what: str):
    path = Path(text)
    try:
        if not text.lstrip().startswith("{") and path.is_file():
            return json.loads(path.read_text(encoding="utf-8"))
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what}: invalid JSON ({exc})") from None


# --- subcommands ------------------------------------------------------------


def cmd_ground_state(args) -> int:
    grid = GridSpec.line(args.L, args.n)
    gs = ground_state(grid)
    out = Path(args.out)
    lab_io.write_csv(
        out / "ground_state.csv", ("x", "Q", "Qx"), zip(grid.x, gs.values, gs.qx().values.real)
    )
    doc = {
        "schema_version": lab_io.SCHEMA_VERSION,
        "grid": grid.to_dict(),
        "mass": mass(gs.q),
        "energy_E": energy_E(gs.q),
        "momentum_P": momentum_P(gs.q),
        "elliptic_residual": elliptic_residual(gs),
        "gn_functional": gn_functional(gs.q),
    }
    lab_io.write_json(out / "invariants.json", doc)
    return EXIT_OK


def cmd_gauge_check(args) -> int:
    grid = GridSpec.line(args.L, args.n)
    rng = np.random.default_rng(args.seed)
    worst = {k: 0.0 for k in GAUGE_TOLERANCES}
    for s in rng.integers(0, 2**31 - 1, size=args.fields):
        for key, value in gauge_identity_errors(random_field(grid, int(s))).items():
            worst[key] = max(worst[key], value)
    checks = {k: {"max_error": worst[k], "tolerance": tol, "passed": worst[k] <= tol} for k, tol in GAUGE_TOLERANCES.items()}
    passed = all(c["passed"] for c in checks.values())
    doc = {
        "schema_version": lab_io.SCHEMA_VERSION,
        "grid": grid.to_dict(),
        "seed": args.seed,
        "fields": args.fields,
        "checks": checks,
        "passed": passed,
    }
    lab_io.write_json(Path(args.out) / "gauge_check.json", doc)
    return EXIT_OK if passed else EXIT_VERDICT


def cmd_evolve(args) -> int:
    grid = _grid(args)
    spec = _json_arg(args.init, "--init") if args.init else {"kind": "ground_state" if args.domain == "line" else "halfline_fixture"}
    try:
        v0 = from_descriptor(grid, spec)
    except ValueError as exc:
        raise UsageError(f"--init: {exc}") from None
    problem = EvolutionProblem(
        args.equation,
        v0,
        args.t_end,
        dt0=args.dt0,
        tolerance=args.tol,
        frame_stride=args.stride,
        stop_grad_norm=args.stop_grad,
        adaptive=not args.fixed,
    )
    outcome = evolve(problem)
    out = Path(args.out)
    csv_path = out if out.suffix == ".csv" else out / "diagnostics.csv"
    lab_io.write_csv(csv_path, CSV_COLUMNS, (r.as_row() for r in outcome.records()))
    summary = {
        "schema_version": lab_io.SCHEMA_VERSION,
        "status": outcome.status.value,
        "t_final": outcome.t_final,
        "steps_accepted": outcome.steps_accepted,
        "steps_rejected": outcome.steps_rejected,
        "warnings": list(outcome.warnings),
        "message": outcome.message,
        "grid": grid.to_dict(),
        "init": spec,
    }
    lab_io.write_json(csv_path.with_name(csv_path.stem + "_summary.json"), summary)
    if args.frames:
        lab_io.write_frames(csv_path.parent / args.frames, [(f.t, f.state) for f in outcome.frames])
    for w in outcome.warnings:
        logging.warning(w)
    if outcome.status is Status.STEP_FAILURE:
        logging.error(outcome.message)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_modulate(args) -> int:
    try:
        _, frames = lab_io.read_frames(args.frames)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read frame dump {args.frames}: {exc}") from None
    rows = []
    for t, field in frames:
        fit = fit_state(field)
        rows.append((t, fit.lambda_, fit.gamma0, fit.x0, fit.residual_h1, fit.momentum_check))
    out = Path(args.out)
    csv_path = out if out.suffix == ".csv" else out / "modulation.csv"
    lab_io.write_csv(csv_path, ("t", "lambda", "gamma0", "x0", "residual_h1", "lambda_times_P"), rows)
    return EXIT_OK


def cmd_experiment(args) -> int:
    doc = {"name": args.name, "parameters": {}, "seed": args.seed}
    if args.config:
        loaded = _json_arg(args.config, "--config")
        if not isinstance(loaded, dict):
            raise UsageError("--config must be a JSON object")
        # either a full config document or a bare parameter map
        if "parameters" in loaded or "seed" in loaded:
            doc["parameters"] = dict(loaded.get("parameters", {}))
            doc["seed"] = int(loaded.get("seed", args.seed))
        else:
            doc["parameters"] = loaded
    try:
        cfg = ExperimentConfig.from_dict(doc, output_dir=Path(args.out))
    except ValueError as exc:
        raise UsageError(f"{exc}; accepted parameters: {', '.join(sorted(DEFAULTS[ExperimentName.parse(args.name)]))}") from None
    verdict = run_experiment(cfg)
    logging.info("%s: %s", cfg.name.slug, "passed" if verdict.passed else f"failed ({verdict.notes})")
    return EXIT_OK if verdict.passed else EXIT_VERDICT


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dnls-lab", description="Numerical lab for the derivative nonlinear Schrodinger equation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ground-state", help="sample Q and report its invariants")
    p.add_argument("--L", type=float, default=30.0)
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_ground_state)

    p = sub.add_parser("gauge-check", help="gauge identities on seeded random fields")
    p.add_argument("--L", type=float, default=20.0)
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fields", type=int, default=50)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_gauge_check)

    p = sub.add_parser("evolve", help="integrate one initial condition")
    p.add_argument("--equation", choices=["dnls", "nls5"], default="dnls")
    p.add_argument("--domain", choices=["line", "halfline"], default="line")
    p.add_argument("--L", type=float, default=None, help="half-width (line) or length (half-line)")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--t-end", type=float, default=1.0)
    p.add_argument("--dt0", type=float, default=1e-3)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--stop-grad", type=float, default=None, help="gradient norm that triggers BlowupStop")
    p.add_argument("--fixed", action="store_true", help="fixed step dt0, no error control")
    p.add_argument("--init", default=None, help=INIT_HELP)
    p.add_argument("--out", required=True, help="CSV path or output directory")
    p.add_argument("--frames", default=None, help="also write a binary frame dump with this file name")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("modulate", help="fit frames of a dump to the ground-state orbit")
    p.add_argument("frames", help="frame dump written by 'evolve --frames'")
    p.add_argument("--out", required=True, help="CSV path or output directory")
    p.set_defaults(func=cmd_modulate)

    p = sub.add_parser("experiment", help="run a scripted experiment and write its verdict")
    p.add_argument("name", choices=[m.slug for m in ExperimentName])
    p.add_argument("--config", default=None, help="JSON text or file: parameter map or {parameters, seed}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_experiment)
    return parser


def _out_dir(args) -> Path:
    out = Path(args.out)
    return out.parent if out.suffix == ".csv" else out


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    started = lab_io.now_iso()
    config = {k: v for k, v in vars(args).items() if k != "func"}
    try:
        code = args.func(args)
    except UsageError as exc:
        print(f"dnls-lab: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except SolverFailure as exc:
        print(f"dnls-lab: solver failure: {exc}", file=sys.stderr)
        code = EXIT_SOLVER
    except DnlsLabError as exc:
        print(f"dnls-lab: {exc}", file=sys.stderr)
        code = EXIT_VERDICT
    out = _out_dir(args)
    if out.is_dir():
        lab_io.write_manifest(out, {"argv": argv, "args": config}, started, __version__)
    return code


if __name__ == "__main__":
    sys.exit(main())
