"""
FIDE Solver - Command-Line Interface
====================================

Commands:
- solve:   run the fixed-point iteration on one grid and emit a report
- study:   run a convergence study over several grids and emit the table
- certify: compute the contraction certificate of a problem
- list:    show the built-in problems

Exit codes: 0 success, 1 usage error, 2 problem-definition error,
3 solver divergence or non-finite iterate, 4 I/O error.
"""

import argparse
import csv
import io
import json
import sys

from fide_solver import __version__
from fide_solver.analysis import (
    check_bound_condition,
    convergence_study,
    estimate_kernel_norms,
    estimate_lipschitz,
    make_certificate,
    observed_orders,
    positivity_check,
)
from fide_solver.exceptions import (
    CertificateError,
    ExpressionError,
    ProblemDefinitionError,
    SolverError,
)
from fide_solver.grid_quadrature import make_grid
from fide_solver.logger import SolverLogger, configure_logging
from fide_solver.problem import builtin, from_config, list_builtins, load_config
from fide_solver.solver import FixedPointSolver, StoppingRule
from fide_solver.solver_config import get_solver_config, get_study_config

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PROBLEM = 2
EXIT_DIVERGENCE = 3
EXIT_IO = 4


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _sci(value):
    return "nan" if value is None else f"{value:.5e}"


# ----------------------------
# Output
# ----------------------------

def _write(sink, text):
    if sink is None or sink == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(sink, "w", encoding="utf-8", newline="") as f:
        f.write(text)


def _csv_text(header, rows, comments=()):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    for comment in comments:
        buffer.write(f"# {comment}\n")
    return buffer.getvalue()


def emit_table(study, fmt, sink=None):
    """
    Write a convergence table.

    CSV: header `N,h2,m,error`, one row per grid, and a trailing
    `# order=...` comment. JSON: the study's fields.
    """
    if not study.rows:
        raise ValueError("cannot emit an empty convergence study")
    if fmt == "json":
        _write(sink, json.dumps(study.to_dict(), indent=2) + "\n")
        return
    order = "n/a" if study.fitted_order is None else _sci(study.fitted_order)
    rows = [(row.N, _sci(row.h2), row.m, _sci(row.error)) for row in study.rows]
    _write(sink, _csv_text(("N", "h2", "m", "error"), rows, [f"order={order}"]))


def emit_solution(report, grid, sink=None):
    """Two-column `x,u` CSV of the final U, ready for any plotting tool."""
    rows = [(_sci(x), _sci(u)) for x, u in zip(grid.nodes, report.U.values)]
    _write(sink, _csv_text(("x", "u"), rows))


def _emit_mapping(data, fmt, sink):
    if fmt == "json":
        _write(sink, json.dumps(data, indent=2) + "\n")
        return
    rows = []
    for key, value in data.items():
        if isinstance(value, float):
            value = _sci(value)
        elif isinstance(value, (list, tuple, dict)):
            value = json.dumps(value)
        rows.append((key, value))
    _write(sink, _csv_text(("key", "value"), rows))


# ----------------------------
# Argument Parsing
# ----------------------------

def _int_list(text):
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text):
    try:
        return [float(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser():
    parser = _ArgumentParser(prog="fide-solver", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    def add_source(sub):
        group = sub.add_mutually_exclusive_group(required=True)
        group.add_argument("--example", help="built-in problem name")
        group.add_argument("--config", help="problem config JSON file")

    def add_output(sub):
        sub.add_argument("--format", choices=("csv", "json"))
        sub.add_argument("--out", help="output path (default stdout)")

    def add_rule(sub):
        sub.add_argument("--criterion", choices=("successive", "exact-h2"))
        sub.add_argument("--tol", type=float)
        sub.add_argument("--max-iter", type=int, dest="max_iter")

    solve_cmd = commands.add_parser("solve", help="solve one problem on one grid")
    add_source(solve_cmd)
    solve_cmd.add_argument("--n", type=int)
    add_rule(solve_cmd)
    add_output(solve_cmd)
    solve_cmd.add_argument("--solution-out", dest="solution_out", help="write x,u plot data here")

    study_cmd = commands.add_parser("study", help="convergence study over several grids")
    add_source(study_cmd)
    study_cmd.add_argument("--n-list", type=_int_list, dest="n_list")
    add_rule(study_cmd)
    add_output(study_cmd)

    certify_cmd = commands.add_parser("certify", help="contraction certificate")
    add_source(certify_cmd)
    certify_cmd.add_argument("--n", type=int, help="grid used for the kernel norms")
    certify_cmd.add_argument("--big-m", type=float, dest="big_m", required=True)
    certify_cmd.add_argument("--l", type=_float_list, dest="lipschitz", help="L0,L1,L2,L3")
    add_output(certify_cmd)

    list_cmd = commands.add_parser("list", help="list built-in problems")
    add_output(list_cmd)
    return parser


def _load_problem(args, config):
    if args.example:
        return builtin(args.example)
    return from_config(load_config(args.config), samples=config["validation_samples"])


def _rule(args, config):
    return StoppingRule(
        args.criterion or config["criterion"],
        args.tol if args.tol is not None else float(config["tol"]),
        args.max_iter if args.max_iter is not None else int(config["max_iterations"]),
    )


# ----------------------------
# Commands
# ----------------------------

def _cmd_solve(args, config):
    n = args.n if args.n is not None else int(config["n"])
    if n < 2:
        raise UsageError(f"--n must be at least 2, got {n}")
    rule = _rule(args, config)
    spec = _load_problem(args, config)
    grid = make_grid(n)
    report = FixedPointSolver(spec, grid, config["divergence_threshold"]).solve(rule)

    if args.solution_out:
        emit_solution(report, grid, args.solution_out)
    if (args.format or "json") == "json":
        _write(args.out, json.dumps(report.to_dict(), indent=2) + "\n")
    else:
        comments = [
            f"problem={report.problem}",
            f"iterations={report.iterations}",
            f"stop_reason={report.stop_reason}",
            f"error={_sci(report.error_vs_exact)}",
        ]
        rows = [(_sci(x), _sci(u)) for x, u in zip(grid.nodes, report.U.values)]
        _write(args.out, _csv_text(("x", "u"), rows, comments))


def _cmd_study(args, config):
    study_config = get_study_config()
    n_list = args.n_list if args.n_list is not None else study_config["n_list"]
    if len(n_list) < 3:
        raise UsageError(f"--n-list needs at least 3 grid sizes, got {n_list}")
    if min(n_list) < 2:
        raise UsageError(f"every grid size must be at least 2, got {n_list}")
    rule = _rule(args, config)
    spec = _load_problem(args, config)
    study = convergence_study(spec, n_list, rule, workers=study_config["workers"])
    SolverLogger.log("Study", "Success", f"Study of {spec.name} finished",
                     details={"orders": observed_orders(study)})
    emit_table(study, args.format or "csv", args.out)


def _cmd_certify(args, config):
    n = args.n if args.n is not None else int(get_study_config()["certify_n"])
    if n < 2:
        raise UsageError(f"--n must be at least 2, got {n}")
    if not args.big_m > 0:
        raise UsageError(f"--big-m must be positive, got {args.big_m}")
    if args.lipschitz is not None and len(args.lipschitz) != 4:
        raise UsageError(f"--l needs 4 constants, got {len(args.lipschitz)}")

    spec = _load_problem(args, config)
    K0, K1 = estimate_kernel_norms(spec, make_grid(n))
    if args.lipschitz is None:
        L, source = estimate_lipschitz(spec, args.big_m, K0, K1), "heuristic"
    else:
        L, source = args.lipschitz, "given"
    cert = make_certificate(args.big_m, L, K0, K1, lipschitz_source=source)
    bound = check_bound_condition(spec, cert)

    data = {"problem": spec.name, "N": n}
    data.update(cert.to_dict())
    data["bound_condition_sampled"] = bound.passed
    data["sampled_max_abs_f"] = bound.max_abs_value
    _emit_mapping(data, args.format or "json", args.out)


def _cmd_list(args, config):
    builtins = list_builtins()
    if args.format == "json":
        _write(args.out, json.dumps(builtins, indent=2) + "\n")
    elif args.format == "csv":
        _write(args.out, _csv_text(("name", "description"), builtins.items()))
    else:
        _write(args.out, "".join(f"{name:10s} {text}\n" for name, text in builtins.items()))


COMMANDS = {
    "solve": _cmd_solve,
    "study": _cmd_study,
    "certify": _cmd_certify,
    "list": _cmd_list,
}


def run(argv=None):
    """
    Run one CLI command.

    Args:
        argv (list of str, optional): Arguments without the program name

    Returns:
        int: Process exit code
    """
    config = get_solver_config()
    configure_logging(config["log_level"])
    try:
        args = build_parser().parse_args(argv)
        COMMANDS[args.command](args, config)
        return EXIT_OK
    except UsageError as e:
        print(f"fide-solver: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as e:
        print(f"fide-solver: solver failed: {e}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (ProblemDefinitionError, ExpressionError, CertificateError) as e:
        print(f"fide-solver: problem error: {e}", file=sys.stderr)
        return EXIT_PROBLEM
    except OSError as e:
        SolverLogger.log_error("I/O failure", e)
        print(f"fide-solver: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"fide-solver: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run(sys.argv[1:]))
