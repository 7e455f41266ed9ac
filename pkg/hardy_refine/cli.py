"""Command-line interface for hardy-refine.

Subcommands run one verification suite each and write a deterministic report.
Exit status: 0 when every verdict is Holds or HoldsWithinError, 2 when any
verdict is Violated, 1 on usage or evaluation errors.
"""

import argparse
import sys
from pathlib import Path

from hardy_refine import __version__
from hardy_refine.config import RefineConfig
from hardy_refine.errors import ConfigError, RefineError
from hardy_refine.funcdsl import GRAMMAR
from hardy_refine.logging import LogLevel, debug, error, get_logger, info, set_up_logging
from hardy_refine.quadrature import QuadConfig, Transform
from hardy_refine.report import HARDY_COLUMNS, format_float, to_csv, to_json, write_text
from hardy_refine.runner import SuiteResult, VerificationRunner

# Module logger
logger = get_logger("cli")

FORMS = ["auto", "classical", "refined", "weighted", "difference"]
P_GRID_SLACK = 1e-12

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VIOLATED = 2


class _ArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit status 1 (2 means Violated)."""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def parse_p_grid(text: str) -> list[float]:
    """Parse ``P``, ``P1,P2,...`` or ``start:end:step`` (end included within 1e-12).

    Raises:
        ConfigError: On malformed input or any p <= 1.
    """
    try:
        if ":" in text:
            parts = [float(x) for x in text.split(":")]
            if len(parts) != 3:
                raise ConfigError(f"p grid must be start:end:step, got {text!r}")
            start, end, step = parts
            if step <= 0 or end < start:
                raise ConfigError(f"p grid needs step > 0 and end >= start, got {text!r}")
            values = []
            k = 0
            while start + k * step <= end + P_GRID_SLACK:
                values.append(start + k * step)
                k += 1
            if abs(values[-1] - end) <= P_GRID_SLACK:
                values[-1] = end
        else:
            values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"invalid p value {text!r}") from None
    if not values:
        raise ConfigError("no p values given")
    bad = [p for p in values if not p > 1]
    if bad:
        raise ConfigError(f"p must be > 1, got {bad[0]!r}")
    return values


def create_parser() -> argparse.ArgumentParser:
    """Create the argument parser for the hardy-refine CLI."""
    parser = _ArgumentParser(
        prog="hardy-refine",
        description="Numerical verification of refined Hardy and superquadratic Jensen inequalities.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=f"""
Examples:
  hardy-refine example                                  # the 1/(t+1), p=2 worked example
  hardy-refine verify-hardy --f "1/(t+1)" --p 2         # refined report
  hardy-refine sweep --f "exp(-t)" --p 2:4:0.5 --format csv
  hardy-refine verify-jensen --f power:1.5:minus
  hardy-refine verify-operator --p 1.5 --dim 3 --trials 50

Functions (--f):
  an expression in t, corpus:<name>, or power:<p>:<plus|minus>
{GRAMMAR}

Configuration:
  hardy_refine.toml, .hardy_refine.toml or pyproject.toml [tool.hardy-refine].
  HARDY_REFINE_SEED overrides the configured seed; --seed overrides both.
""",
    )

    # === Global Options ===
    parser.add_argument("--version", action="version", version=f"hardy-refine {__version__}")
    parser.add_argument("--config", type=Path, metavar="PATH", help="Path to a configuration file")
    parser.add_argument("--isolated", action="store_true", help="Ignore all configuration files")
    parser.add_argument("-v", "--verbose", action="store_true", help="Enable verbose logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="Only print warnings and errors")
    parser.add_argument("-s", "--silent", action="store_true", help="Only print errors")

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    hardy_parser = subparsers.add_parser(
        "verify-hardy",
        help="Check a Hardy inequality for one function",
        description="Evaluate lhs, classical and refined right-hand sides for f at each p.",
    )
    _add_common_args(hardy_parser, f_required=True, p_required=True)
    hardy_parser.add_argument(
        "--form",
        choices=FORMS,
        default="auto",
        help="Inequality form (auto: refined for p >= 2, difference below)",
    )

    jensen_parser = subparsers.add_parser(
        "verify-jensen",
        help="Grid superquadraticity and sharpened Jensen gaps",
        description="Decide superquadraticity of f on a grid and check Jensen gaps on random measures.",
    )
    _add_common_args(jensen_parser, f_required=True, p_required=False)
    jensen_parser.add_argument("--grid", type=str, metavar="POINTS", help="Comma-separated grid")
    jensen_parser.add_argument("--trials", type=int, metavar="N", help="Random measures to test")

    operator_parser = subparsers.add_parser(
        "verify-operator",
        help="Operator Jensen, refined operator Hardy and Hansen checks",
        description="Finite-dimensional operator checks on seeded random instances.",
    )
    _add_common_args(operator_parser, f_required=False, p_required=False)
    operator_parser.add_argument("--dim", type=int, metavar="D", help="Matrix dimension")
    operator_parser.add_argument("--grid-points", type=int, metavar="M", help="Field grid points")
    operator_parser.add_argument("--trials", type=int, metavar="N", help="Random instances / search trials")

    sweep_parser = subparsers.add_parser(
        "sweep",
        help="One Hardy report per p on a grid",
        description="Compute a Hardy report for every p of a start:end:step grid.",
    )
    _add_common_args(sweep_parser, f_required=True, p_required=True)
    sweep_parser.add_argument("--form", choices=FORMS, default="auto", help="Inequality form")

    example_parser = subparsers.add_parser(
        "example",
        help="Reproduce the f(t) = 1/(t+1), p = 2 example",
        description="Run the worked example and print values with their deviations.",
    )
    _add_quad_args(example_parser)
    _add_output_args(example_parser)

    return parser


def _add_quad_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tol", type=float, metavar="REL", help="Relative quadrature tolerance")
    parser.add_argument("--abs-tol", type=float, metavar="ABS", help="Absolute quadrature tolerance")
    parser.add_argument(
        "--transform",
        choices=[t.value for t in Transform],
        help="Half-line mapping (default: rational)",
    )


def _add_output_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", type=Path, metavar="PATH", help="Report file (default: stdout)")
    parser.add_argument("--format", choices=["json", "csv"], help="Report format")


def _add_common_args(parser: argparse.ArgumentParser, f_required: bool, p_required: bool) -> None:
    """Add the arguments shared by the verification subcommands."""
    parser.add_argument("--f", dest="f", required=f_required, metavar="EXPR", help="Function of t")
    parser.add_argument(
        "--p",
        dest="p",
        required=p_required,
        metavar="P",
        help="Exponent: value, comma list or start:end:step",
    )
    _add_quad_args(parser)
    parser.add_argument("--seed", type=int, help="Master seed (default: 42)")
    parser.add_argument("--jobs", type=int, metavar="N", help="Worker processes")
    _add_output_args(parser)


def _quad_config(args: argparse.Namespace, config: RefineConfig) -> QuadConfig:
    tol = getattr(args, "tol", None)
    abs_tol = getattr(args, "abs_tol", None)
    if (tol is not None and tol <= 0) or (abs_tol is not None and abs_tol <= 0):
        raise ConfigError("tolerances must be > 0")
    transform = getattr(args, "transform", None)
    return config.get_quad_config(
        rel_tol=tol,
        abs_tol=abs_tol,
        transform=Transform(transform) if transform else None,
    )


def _seed(args: argparse.Namespace, config: RefineConfig) -> int:
    return args.seed if getattr(args, "seed", None) is not None else config.get_seed()


def _positive(value: int | None, default: int, name: str) -> int:
    value = default if value is None else value
    if value < 0 or (value == 0 and name != "trials"):
        raise ConfigError(f"--{name} must be positive, got {value}")
    return value


def _emit(result: SuiteResult, args: argparse.Namespace, config: RefineConfig, columns=None) -> int:
    fmt = args.format or config.get_output_format()
    text = to_csv(result.records, columns) if fmt == "csv" else to_json(result)
    write_text(text, args.out)
    if args.out is not None:
        info("Wrote %s report to %s", fmt, args.out, logger_name="cli")
    for finding in result.findings:
        logger.warning("finding recorded at p=%g (seed %s, trial %s)", finding["p"], finding["seed"], finding["trial"])
    violated = result.verdicts.count("Violated")
    info(
        "%s: %d verdict(s), %d violated, %d finding(s)",
        result.name, len(result.verdicts), violated, len(result.findings), logger_name="cli",
    )
    return result.exit_code


def cmd_verify_hardy(args: argparse.Namespace, config: RefineConfig) -> int:
    """Run the verify-hardy command."""
    runner = VerificationRunner(config, jobs=args.jobs)
    result = runner.verify_hardy(args.f, parse_p_grid(args.p), args.form, _quad_config(args, config))
    return _emit(result, args, config, HARDY_COLUMNS)


def cmd_sweep(args: argparse.Namespace, config: RefineConfig) -> int:
    """Run the sweep command."""
    runner = VerificationRunner(config, jobs=args.jobs)
    result = runner.sweep(args.f, parse_p_grid(args.p), args.form, _quad_config(args, config))
    return _emit(result, args, config, HARDY_COLUMNS)


def cmd_verify_jensen(args: argparse.Namespace, config: RefineConfig) -> int:
    """Run the verify-jensen command."""
    if args.grid:
        try:
            grid = [float(x) for x in args.grid.split(",")]
        except ValueError:
            raise ConfigError(f"--grid must be comma-separated numbers, got {args.grid!r}") from None
    else:
        grid = config.get_superquad_grid()
    trials = _positive(args.trials, config.get_trials(), "trials")
    runner = VerificationRunner(config, jobs=args.jobs)
    result = runner.verify_jensen(args.f, grid, config.get_superquad_tol(), trials, _seed(args, config))
    return _emit(result, args, config)


def cmd_verify_operator(args: argparse.Namespace, config: RefineConfig) -> int:
    """Run the verify-operator command."""
    ps = parse_p_grid(args.p) if args.p else [2.0]
    if len(ps) != 1:
        raise ConfigError("verify-operator takes a single p")
    runner = VerificationRunner(config, jobs=args.jobs)
    result = runner.verify_operator(
        args.f,
        ps[0],
        _quad_config(args, config),
        dim=_positive(args.dim, config.get_dim(), "dim"),
        grid_points=_positive(args.grid_points, config.get_grid_points(), "grid-points"),
        trials=_positive(args.trials, config.get_trials(), "trials"),
        seed=_seed(args, config),
    )
    return _emit(result, args, config)


def cmd_example(args: argparse.Namespace, config: RefineConfig) -> int:
    """Run the worked example and print the reference comparison."""
    runner = VerificationRunner(config, jobs=1)
    report, rows = runner.example(_quad_config(args, config))
    if args.out is not None or args.format is not None:
        fmt = args.format or config.get_output_format()
        text = to_csv(rows) if fmt == "csv" else to_json({"report": report, "references": rows})
        write_text(text, args.out)
    else:
        print(f"f(t) = {report.function}, p = 2")
        print(f"{'quantity':<16}{'value':>26}{'reference':>26}{'deviation':>12}")
        for row in rows:
            print(
                f"{row['quantity']:<16}{format_float(row['value']):>26}"
                f"{format_float(row['reference']):>26}{row['deviation']:>12.2e}"
            )
        print(f"verdict: {report.verdict.value} (err_budget {report.err_budget:.3g})")
    return EXIT_VIOLATED if not report.verdict.ok else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    """Main entry point for the hardy-refine CLI."""
    parser = create_parser()
    args = parser.parse_args(argv)

    # Priority: silent > quiet > verbose > default
    log_level = LogLevel.DEFAULT
    if args.silent:
        log_level = LogLevel.SILENT
    elif args.quiet:
        log_level = LogLevel.QUIET
    elif args.verbose:
        log_level = LogLevel.VERBOSE
    set_up_logging(log_level)

    debug("hardy-refine version: %s", __version__, logger_name="cli")
    debug("Command: %s", args.command, logger_name="cli")

    if args.command is None:
        parser.print_help()
        return EXIT_OK

    handlers = {
        "verify-hardy": cmd_verify_hardy,
        "verify-jensen": cmd_verify_jensen,
        "verify-operator": cmd_verify_operator,
        "sweep": cmd_sweep,
        "example": cmd_example,
    }
    try:
        config = RefineConfig(config_path=args.config, isolated=args.isolated)
        config.load()
        return handlers[args.command](args, config)
    except RefineError as e:
        error("%s", e, logger_name="cli")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
