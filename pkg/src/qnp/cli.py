"""``qnp`` command line: check, solve and verify interpolation problems.

Exit codes::

    0   PSD system / solution produced (possibly with warnings)
    2   Pick matrix not positive semidefinite
    3   inconsistent data or a candidate that fails to interpolate
    64  unreadable or malformed input (including bad command-line usage)
    65  two nodes on the same 2-sphere
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from . import linalg as ql
from .errors import (
    DenominatorDegenerateError,
    InconsistentDataError,
    InfeasibleError,
    NoUnitaryParameterError,
    ProblemFormatError,
    SphereCollisionError,
)
from .io import dumps, load_problem, load_solution, solution_to_dict
from .pick import RANK_TOL, build_system, r1_structural_check, solve, verify
from .quaternion import ONE, qabs

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_INCONSISTENT = 3
EXIT_USAGE = 64
EXIT_COLLISION = 65

# a candidate whose extrapolated limit misses s_u by more than this is rejected
# outright; smaller misses are reported as warnings
GROSS_LIMIT_ERROR = 1e-2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _grid(text: str) -> list[float]:
    try:
        grid = sorted(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad radius grid {text!r}") from exc
    if len(grid) < 2 or not all(0.0 < r < 1.0 for r in grid):
        raise argparse.ArgumentTypeError("radius grid needs at least two radii in (0, 1)")
    return grid


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--truncation", type=int, default=None, help="series truncation order T")
    common.add_argument("--tol", type=float, default=None, help="PSD tolerance (relative)")
    common.add_argument("--seed", type=int, default=None, help="sampling seed")
    common.add_argument("--radius-grid", type=_grid, default=None, help="comma-separated radii, e.g. 0.9,0.99")
    common.add_argument("-o", "--output", type=Path, default=None, help="write the JSON report here")

    parser = _Parser(prog="qnp", description="Boundary Nevanlinna-Pick interpolation for quaternionic Schur functions.")
    parser.add_argument("--version", action="version", version=f"qnp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("check", parents=[common], help="Pick matrix eigenvalues and PSD verdict")
    p.add_argument("problem")
    p = sub.add_parser("solve", parents=[common], help="solve and verify")
    p.add_argument("problem")
    p = sub.add_parser("verify", parents=[common], help="verify a candidate solution")
    p.add_argument("problem")
    p.add_argument("solution")
    return parser


def pick_section(prob, tol: float) -> dict:
    system = build_system(prob)
    eigs = system.eigenvalues()
    scale = max(1.0, float(np.max(np.abs(eigs))))
    return {
        "matrix": system.P,
        "eigenvalues": eigs,
        "rank": int(np.count_nonzero(eigs > RANK_TOL * scale)),
        "psd": bool(eigs[0] >= -tol * scale),
        "stein_residual": system.offdiag_stein_residual(),
        "structural_residual": r1_structural_check(system),
    }


def _options(pf, args) -> dict:
    return pf.resolved_options(
        truncation=args.truncation, tol=args.tol, seed=args.seed, radius_grid=args.radius_grid
    )


def cmd_check(args) -> tuple[dict, int]:
    pf = load_problem(args.problem)
    prob = pf.problem()
    opts = _options(pf, args)
    pick = pick_section(prob, opts["tol"])
    status = "feasible" if pick["psd"] else "infeasible"
    return {"status": status, "pick": pick}, EXIT_OK if pick["psd"] else EXIT_INFEASIBLE


def _verification_status(rep, provenance: str | None, extra_warnings: list[str]) -> tuple[str, int]:
    if any(n.limit_error > GROSS_LIMIT_ERROR for n in rep.nodes):
        return "inconsistent", EXIT_INCONSISTENT
    if not rep.ok or rep.warnings or extra_warnings:
        return "solved-with-warnings", EXIT_OK
    return ("degenerate-solved" if provenance in ("degenerate", "rank0") else "solved"), EXIT_OK


def cmd_solve(args) -> tuple[dict, int]:
    pf = load_problem(args.problem)
    prob = pf.problem()
    opts = _options(pf, args)
    report: dict = {"status": None, "pick": pick_section(prob, opts["tol"])}
    if not report["pick"]["psd"]:
        report["status"] = "infeasible"
        return report, EXIT_INFEASIBLE
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            sol = solve(prob, order=int(opts["truncation"]), tol=float(opts["tol"]), seed=int(opts["seed"]))
        except InfeasibleError:
            report["status"] = "infeasible"
            return report, EXIT_INFEASIBLE
        except (InconsistentDataError, NoUnitaryParameterError, DenominatorDegenerateError) as exc:
            report["status"] = "inconsistent"
            report["error"] = str(exc)
            return report, EXIT_INCONSISTENT
    notes = [str(w.message) for w in caught]
    theta = sol.theta
    report["theta"] = {
        "coeff_count": int(opts["truncation"]) + 1 if theta is not None else 0,
        "theta_at_1_residual": float(np.max(qabs(theta.evaluate(ONE) - ql.identity(2)))) if theta is not None else None,
    }
    report["solution"] = solution_to_dict(sol)
    report["solution"]["schur_max"] = sol.schur_max
    rep = verify(sol, prob, opts["radius_grid"])
    report["verification"] = rep.to_dict()
    report["warnings"] = notes
    report["status"], code = _verification_status(rep, sol.provenance, notes)
    return report, code


def cmd_verify(args) -> tuple[dict, int]:
    pf = load_problem(args.problem)
    prob = pf.problem()
    opts = _options(pf, args)
    sol = load_solution(args.solution)
    rep = verify(sol, prob, opts["radius_grid"])
    report = {"status": None, "verification": rep.to_dict()}
    report["status"], code = _verification_status(rep, sol.provenance, [])
    return report, code


COMMANDS = {"check": cmd_check, "solve": cmd_solve, "verify": cmd_verify}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report, code = COMMANDS[args.command](args)
    except ProblemFormatError as exc:
        report, code = {"status": "error", "error": {"kind": "format", "message": str(exc)}}, EXIT_USAGE
    except SphereCollisionError as exc:
        report, code = {"status": "error", "error": {"kind": "sphere-collision", "message": str(exc)}}, EXIT_COLLISION
    text = dumps(report)
    if args.output is not None:
        args.output.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if code in (EXIT_USAGE, EXIT_COLLISION):
        print(f"qnp: {report['error']['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
