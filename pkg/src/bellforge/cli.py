"""Command-line interface: verify identities, maximize functionals, find extensions.

Subcommands:

* ``verify``   -- numeric checks of the flip/antisymmetrizer/Werner and
  source-operator identities for one local dimension.
* ``bell``     -- see-saw maximization of the perfect-correlation Bell
  gap or the CHSH combination on a chosen state.
* ``dso-find`` -- alternating-projection search for a tripartite
  extension with prescribed marginals.

Every run writes a single JSON report to stdout (floats carry 17
significant digits, so identical inputs give identical bytes) and a
short human summary to stderr unless ``--quiet`` is passed.  Exit codes:
0 all checks passed, 1 a check failed or a violation was found, 2 usage
error, 3 structurally valid but non-density input data.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .bell import SeeSawConfig, seesaw_chsh, seesaw_original_bell
from .extensions import dykstra_find_extension, pattern_right2, pattern_sym3, verify_marginals
from .linalg import (
    TensorOperator,
    eig_hermitian,
    frobenius_distance,
    identity,
    load_operator,
    partial_trace,
    save_operator,
    trace,
)
from .states import (
    DensityOperator,
    antisym_projector,
    antisymmetrizer3,
    density_deficits,
    dso_general,
    dso_two_qubit,
    flip,
    singlet,
    werner,
)

__all__ = ["main", "entrypoint", "render_json"]

THREADS_ENV = "BELLFORGE_THREADS"


class _UsageError(Exception):
    """Bad command line or unreadable input file (exit code 2)."""


class _DataError(Exception):
    """Input parsed but fails the density-operator contract (exit code 3)."""


@dataclass
class _Outcome:
    parameters: dict
    results: dict
    passed: bool
    notes: list[str] = field(default_factory=list)


def render_json(value, level: int = 0) -> str:
    """Serialize a report deterministically; floats get 17 significant digits."""
    pad = "  " * level
    inner_pad = "  " * (level + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        rows = ",\n".join(
            f"{inner_pad}{json.dumps(str(k))}: {render_json(v, level + 1)}"
            for k, v in value.items()
        )
        return "{\n" + rows + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        rows = ",\n".join(f"{inner_pad}{render_json(v, level + 1)}" for v in value)
        return "[\n" + rows + "\n" + pad + "]"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, str):
        return json.dumps(value)
    if value is None:
        return "null"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return 1
    try:
        threads = int(raw)
    except ValueError:
        print(f"warning: ignoring non-integer {THREADS_ENV}={raw!r}", file=sys.stderr)
        return 1
    return max(1, threads)


def _resolve_state(name: str, d: int | None, lo: int = 2, hi: int = 6) -> DensityOperator:
    """Build the requested bipartite state, validating dimensions along the way."""
    if name == "werner":
        if d is None:
            raise _UsageError("--state werner requires --d")
        if not lo <= d <= hi:
            raise _UsageError(f"--d must lie in {lo}..{hi}, got {d}")
        return werner(d)
    if name == "singlet":
        if d is not None and d != 2:
            raise _UsageError(f"--state singlet is two-dimensional, got --d {d}")
        return singlet()
    if name.startswith("file:"):
        path = name[len("file:"):]
        try:
            op = load_operator(path)
        except (OSError, ValueError) as exc:
            raise _UsageError(f"cannot read state file {path!r}: {exc}") from exc
        dims = op.factor_dims
        if len(dims) != 2 or dims[0] != dims[1]:
            raise _DataError(f"state file must hold a bipartite operator with equal factors, got {dims}")
        if d is not None and dims[0] != d:
            raise _DataError(f"state file has local dimension {dims[0]}, but --d {d} was given")
        if not lo <= dims[0] <= hi:
            raise _DataError(f"state file local dimension {dims[0]} outside {lo}..{hi}")
        try:
            return DensityOperator(op)
        except ValueError as exc:
            raise _DataError(f"state file is not a density operator: {exc}") from exc
    raise _UsageError(f"unknown state {name!r}; use werner, singlet, or file:PATH")


def _check(value: float, threshold: float) -> dict:
    return {"value": float(value), "threshold": float(threshold), "pass": bool(value <= threshold)}


def cmd_verify(args: argparse.Namespace) -> _Outcome:
    d, tol = args.d, args.tol
    if not 2 <= d <= 6:
        raise _UsageError(f"--d must lie in 2..6, got {d}")
    if tol <= 0:
        raise _UsageError(f"--tol must be positive, got {tol}")

    checks: dict[str, dict] = {}
    eye2 = identity((d, d))
    v = flip(d)
    checks["flip_trace"] = _check(abs(trace(v) - d), tol)
    checks["flip_involution"] = _check(frobenius_distance(v @ v, eye2), tol)

    w = werner(d)
    alt = ((d + 1) / d**3) * eye2 - (1.0 / d**2) * v
    checks["werner_forms_agree"] = _check(frobenius_distance(w.op, alt), tol)
    checks["werner_trace"] = _check(abs(trace(w.op) - 1.0), tol)
    _, _, negativity = density_deficits(w.op)
    checks["werner_negativity"] = _check(negativity, tol)
    eigvals = eig_hermitian(w.op).eigenvalues
    expected = np.concatenate(
        [
            np.full(d * (d - 1) // 2, 1.0 / d**3 + 2.0 / d**2),
            np.full(d * (d + 1) // 2, 1.0 / d**3),
        ]
    )
    checks["werner_spectrum"] = _check(float(np.max(np.abs(eigvals - expected))), tol)

    q = antisymmetrizer3(d)
    pm = antisym_projector(d)
    if d == 2:
        checks["antisymmetrizer_vanishes"] = _check(float(np.linalg.norm(q.entries)), tol)
    checks["antisymmetrizer_idempotent"] = _check(frobenius_distance(q @ q, q), tol)
    checks["antisymmetrizer_trace"] = _check(
        abs(trace(q) - d * (d - 1) * (d - 2) / 6.0), tol
    )
    target = ((d - 2) / 3.0) * pm
    for j in (1, 2, 3):
        checks[f"antisymmetrizer_partial_trace_{j}"] = _check(
            frobenius_distance(partial_trace(q, j), target), tol
        )

    source = dso_two_qubit() if d == 2 else dso_general(d)
    checks["source_trace"] = _check(abs(trace(source.op) - 1.0), tol)
    _, _, source_neg = density_deficits(source.op)
    checks["source_negativity"] = _check(source_neg, tol)
    if d == 2:
        for j, residual in zip((2, 3), verify_marginals(source.op, pattern_right2(w))):
            checks[f"source_marginal_{j}"] = _check(residual, tol)
        mixed = (1.0 / 4.0) * identity((2, 2))
        checks["source_marginal_1_mixed"] = _check(
            frobenius_distance(partial_trace(source.op, 1), mixed), tol
        )
        dso_expected = np.array([0.375, 0.375, 0.125, 0.125, 0.0, 0.0, 0.0, 0.0])
        dso_vals = eig_hermitian(source.op).eigenvalues
        checks["source_spectrum"] = _check(float(np.max(np.abs(dso_vals - dso_expected))), tol)
    else:
        for j, residual in zip((1, 2, 3), verify_marginals(source.op, pattern_sym3(w))):
            checks[f"source_marginal_{j}"] = _check(residual, tol)

    passed = all(entry["pass"] for entry in checks.values())
    npass = sum(entry["pass"] for entry in checks.values())
    notes = [f"verify d={d}: {npass}/{len(checks)} identity checks passed"]
    return _Outcome(
        parameters={"d": d, "tol": tol},
        results=checks,
        passed=passed,
        notes=notes,
    )


def cmd_bell(args: argparse.Namespace) -> _Outcome:
    if args.restarts < 1:
        raise _UsageError(f"--restarts must be positive, got {args.restarts}")
    if args.tol <= 0:
        raise _UsageError(f"--tol must be positive, got {args.tol}")
    if args.seed < 0:
        raise _UsageError(f"--seed must be nonnegative, got {args.seed}")
    rho = _resolve_state(args.state, args.d)
    threads = _thread_count()
    cfg = SeeSawConfig(restarts=args.restarts, base_seed=args.seed)
    if args.functional == "original":
        result = seesaw_original_bell(rho, cfg, threads=threads)
        threshold = args.tol
        kind = "perfect-correlation gap"
    else:
        result = seesaw_chsh(rho, cfg, threads=threads)
        threshold = 2.0 + args.tol
        kind = "CHSH value"

    entry = _check(result.best_value, threshold)
    passed = entry["pass"]
    notes = [
        f"{kind} {result.best_value:.12g} from restart {result.restart_index} "
        f"after {result.sweeps_used} sweeps"
    ]
    if not passed:
        notes.append(
            f"VIOLATION: {kind} {result.best_value:.12g} exceeds threshold {threshold:.12g}"
        )
    return _Outcome(
        parameters={
            "d": rho.factor_dims[0],
            "functional": args.functional,
            "state": args.state,
            "restarts": args.restarts,
            "seed": args.seed,
            "tol": args.tol,
            "threads": threads,
        },
        results={"best_value": entry},
        passed=passed,
        notes=notes,
    )


def cmd_dso_find(args: argparse.Namespace) -> _Outcome:
    if args.iters < 1:
        raise _UsageError(f"--iters must be positive, got {args.iters}")
    if args.tol <= 0:
        raise _UsageError(f"--tol must be positive, got {args.tol}")
    rho = _resolve_state(args.state, args.d)
    pattern = pattern_sym3(rho) if args.pattern == "sym3" else pattern_right2(rho)
    result = dykstra_find_extension(rho, pattern, max_iters=args.iters, tol=args.tol)
    if args.dump:
        try:
            save_operator(result.candidate, args.dump)
        except OSError as exc:
            raise _UsageError(f"cannot write dump file {args.dump!r}: {exc}") from exc

    entry = _check(result.residual, args.tol)
    entry["pass"] = result.converged
    if result.converged:
        notes = [
            f"extension found: residual {result.residual:.3e} after "
            f"{result.iterations} cycles"
        ]
    else:
        notes = [
            f"no extension found within {result.iterations} cycles "
            f"(best residual {result.residual:.3e})"
        ]
    if args.dump:
        notes.append(f"candidate written to {args.dump}")
    return _Outcome(
        parameters={
            "d": rho.factor_dims[0],
            "state": args.state,
            "pattern": args.pattern,
            "iters": args.iters,
            "tol": args.tol,
            "dump": args.dump,
        },
        results={"residual": entry},
        passed=result.converged,
        notes=notes,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bellforge",
        description="Werner-state identities, Bell-functional maximization, extension search.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="check the operator identities for one dimension")
    p_verify.add_argument("--d", type=int, required=True, help="local dimension, 2..6")
    p_verify.add_argument("--tol", type=float, default=1e-10, help="pass threshold")
    p_verify.add_argument("--quiet", action="store_true", help="suppress the stderr summary")
    p_verify.set_defaults(func=cmd_verify)

    p_bell = sub.add_parser("bell", help="maximize a correlation functional by see-saw")
    p_bell.add_argument("--d", type=int, default=None, help="local dimension, 2..6")
    p_bell.add_argument(
        "--functional", choices=("original", "chsh"), required=True, help="objective to maximize"
    )
    p_bell.add_argument(
        "--state", default="werner", help="werner, singlet, or file:PATH (matrix text format)"
    )
    p_bell.add_argument("--restarts", type=int, default=50, help="random restarts")
    p_bell.add_argument("--seed", type=int, default=0, help="base seed; restart r uses seed+r")
    p_bell.add_argument("--tol", type=float, default=1e-7, help="violation threshold slack")
    p_bell.add_argument("--quiet", action="store_true", help="suppress the stderr summary")
    p_bell.set_defaults(func=cmd_bell)

    p_find = sub.add_parser("dso-find", help="search for a tripartite extension")
    p_find.add_argument("--d", type=int, default=None, help="local dimension, 2..6")
    p_find.add_argument(
        "--state", default="werner", help="werner, singlet, or file:PATH (matrix text format)"
    )
    p_find.add_argument(
        "--pattern",
        choices=("sym3", "right2"),
        required=True,
        help="marginal pattern: all three factors, or factors 2 and 3",
    )
    p_find.add_argument("--iters", type=int, default=5000, help="projection cycles to run")
    p_find.add_argument("--tol", type=float, default=1e-6, help="residual convergence threshold")
    p_find.add_argument("--dump", default=None, help="write the candidate to this path")
    p_find.add_argument("--quiet", action="store_true", help="suppress the stderr summary")
    p_find.set_defaults(func=cmd_dso_find)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 0 if code is None else 2

    start = time.perf_counter()
    try:
        outcome = args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    wall_ms = (time.perf_counter() - start) * 1000.0

    report = {
        "command": args.command,
        "parameters": outcome.parameters,
        "results": outcome.results,
        "wall_time_ms": wall_ms,
        "artifact_version": __version__,
    }
    sys.stdout.write(render_json(report) + "\n")
    if not args.quiet:
        for note in outcome.notes:
            print(note, file=sys.stderr)
    return 0 if outcome.passed else 1


def entrypoint() -> None:
    raise SystemExit(main())
