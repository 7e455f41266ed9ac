"""Test the hardy-refine CLI against its interface spec file and by running it."""

import argparse
import csv
import inspect
import io
import json
from pathlib import Path

import pytest

from hardy_refine import cli
from hardy_refine.cli import create_parser, main, parse_p_grid
from hardy_refine.errors import ConfigError

SPEC_FILE = Path(__file__).parent / "fixtures" / "cli_spec.json"
CLI_FILE = Path(cli.__file__)


def get_parser_flags(parser: argparse.ArgumentParser) -> set[str]:
    """Extract all option flags from a parser."""
    flags = set()
    for action in parser._actions:
        if action.option_strings:
            flags.update(action.option_strings)
    return flags


def get_subparser(parser: argparse.ArgumentParser, command: str) -> argparse.ArgumentParser | None:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction) and command in action.choices:
            return action.choices[command]
    return None


def extract_flags(spec_options: dict) -> set[str]:
    """Extract all flags from a spec options dict."""
    return {flag for opts in spec_options.values() for opt in opts for flag in opt.get("flags", [])}


def find_flag_line(flag: str) -> int | None:
    """Find the line number in cli.py where a flag is defined."""
    source_lines = inspect.getsourcelines(cli)[0]
    for i, line in enumerate(source_lines, start=1):
        if f'"{flag}"' in line:
            return i
    return None


def validate_spec(parser: argparse.ArgumentParser, spec: dict) -> list[str]:
    """Validate parser against spec, return list of errors."""
    errors = []

    global_flags = get_parser_flags(parser)
    for opt in spec["global_options"]["required"]:
        for flag in opt["flags"]:
            if flag not in global_flags:
                errors.append(f"global: {flag}")

    for cmd, cmd_spec in spec["commands"].items():
        subparser = get_subparser(parser, cmd)
        if subparser is None:
            errors.append(f"command: {cmd}")
            continue
        cmd_flags = get_parser_flags(subparser)
        for flag in extract_flags(cmd_spec["options"]):
            if flag not in cmd_flags:
                errors.append(f"{cmd}: {flag}")

        # Required flags must be required by argparse too
        for opts in cmd_spec["options"].values():
            for opt in opts:
                if not opt.get("required"):
                    continue
                action = next(a for a in subparser._actions if opt["flags"][0] in a.option_strings)
                if not action.required:
                    errors.append(f"{cmd}: {opt['flags'][0]} not required")

    for cmd, formats in spec["output_formats"].items():
        subparser = get_subparser(parser, cmd)
        if subparser is None:
            continue
        for action in subparser._actions:
            if "--format" in action.option_strings:
                for fmt in set(formats) - set(action.choices or ()):
                    errors.append(f"{cmd} format: {fmt}")
            if "--transform" in action.option_strings:
                for name in set(spec["transforms"]) - set(action.choices or ()):
                    errors.append(f"{cmd} transform: {name}")
            if "--form" in action.option_strings:
                for name in set(spec["forms"]) - set(action.choices or ()):
                    errors.append(f"{cmd} form: {name}")

    return errors


@pytest.fixture
def spec() -> dict:
    with open(SPEC_FILE) as f:
        return json.load(f)


def test_cli_parity(spec):
    """The parser exposes every command and flag of the interface spec."""
    errors = validate_spec(create_parser(), spec)
    assert not errors, "Missing CLI elements:\n" + "\n".join(f"  - {e}" for e in errors)


def test_every_flag_is_defined_in_cli_module(spec):
    flags = {f for opt in spec["global_options"]["required"] for f in opt["flags"] if f.startswith("--")}
    for cmd_spec in spec["commands"].values():
        flags |= {f for f in extract_flags(cmd_spec["options"]) if f.startswith("--")}
    # --f is defined through dest, the others literally
    missing = [f for f in sorted(flags) if find_flag_line(f) is None]
    assert not missing, f"flags not found in {CLI_FILE.name}: {missing}"


# ========== p grids ==========


def test_p_grid_range_includes_end():
    assert parse_p_grid("2:4:0.5") == [2.0, 2.5, 3.0, 3.5, 4.0]


def test_p_grid_list_and_single():
    assert parse_p_grid("1.5,2,3") == [1.5, 2.0, 3.0]
    assert parse_p_grid("2") == [2.0]


@pytest.mark.parametrize("text", ["0.5", "1", "2:4", "4:2:0.5", "2:4:0", "abc", ""])
def test_p_grid_rejects_bad_input(text):
    with pytest.raises(ConfigError):
        parse_p_grid(text)


# ========== Running commands ==========


@pytest.fixture(autouse=True)
def no_seed_env(monkeypatch):
    monkeypatch.delenv("HARDY_REFINE_SEED", raising=False)


def test_no_command_prints_help(capsys):
    assert main([]) == 0
    assert "verify-hardy" in capsys.readouterr().out


def test_missing_required_flag_exits_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--isolated", "verify-hardy", "--p", "2"])
    assert exc.value.code == 1
    assert "--f" in capsys.readouterr().err


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "hardy-refine" in capsys.readouterr().out


def test_zero_function_holds_with_zero_margin(tmp_path):
    out = tmp_path / "zero.json"
    code = main(["--isolated", "-q", "verify-hardy", "--f", "0", "--p", "3", "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text())
    record = report["records"][0]
    assert record["verdict"] == "Holds"
    assert record["refined_margin"] == 0.0
    assert record["lhs"] == 0.0


def test_p_below_one_is_an_error():
    assert main(["--isolated", "-s", "verify-hardy", "--f", "exp(-t)", "--p", "0.5"]) == 1


def test_bad_expression_is_an_error():
    assert main(["--isolated", "-s", "verify-hardy", "--f", "1/(t+", "--p", "2"]) == 1


def test_refined_form_below_two_is_an_error():
    assert main(["--isolated", "-s", "verify-hardy", "--f", "exp(-t)", "--p", "1.5", "--form", "refined"]) == 1


def test_verify_jensen_expected_verdicts(tmp_path):
    for tag in ("power:3:plus", "power:1.5:minus", "power:1.5:plus"):
        out = tmp_path / "jensen.json"
        assert main(["--isolated", "-q", "verify-jensen", "--f", tag, "--trials", "20", "--out", str(out)]) == 0
        assert json.loads(out.read_text())["summary"]["verdict"] == "Holds"


def test_reports_are_byte_identical(tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for path in paths:
        args = ["--isolated", "-q", "verify-jensen", "--f", "t^2.5", "--trials", "25", "--seed", "7", "--out", str(path)]
        assert main(args) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_seed_env_changes_random_instances(tmp_path, monkeypatch):
    args = ["--isolated", "-q", "verify-jensen", "--f", "t^3", "--trials", "5"]
    main(args + ["--out", str(tmp_path / "default.json")])
    monkeypatch.setenv("HARDY_REFINE_SEED", "1234")
    main(args + ["--out", str(tmp_path / "env.json")])
    assert (tmp_path / "default.json").read_text() != (tmp_path / "env.json").read_text()


def test_verify_operator_small_run(tmp_path):
    out = tmp_path / "operator.json"
    args = [
        "--isolated", "-q", "verify-operator", "--p", "1.5",
        "--dim", "2", "--grid-points", "9", "--trials", "3", "--out", str(out),
    ]
    assert main(args) == 0
    report = json.loads(out.read_text())
    checks = [r["check"] for r in report["records"]]
    assert checks.count("theorem-jensen") == 3
    assert checks.count("hansen") == 3


def test_verify_operator_search_with_zero_trials(tmp_path):
    out = tmp_path / "search.json"
    args = ["--isolated", "-q", "verify-operator", "--p", "3", "--dim", "1", "--trials", "0", "--out", str(out)]
    assert main(args) == 0
    report = json.loads(out.read_text())
    assert report["summary"]["hansen_search"] == {"trials": 0, "found": False}


@pytest.mark.slow
def test_example_prints_references(capsys):
    assert main(["--isolated", "-q", "example"]) == 0
    out = capsys.readouterr().out
    assert "verdict: Holds" in out
    assert "refined_margin" in out


@pytest.mark.slow
def test_sweep_csv_has_one_row_per_p(capsys):
    code = main(["--isolated", "-q", "sweep", "--f", "exp(-t)", "--p", "2:4:0.5", "--format", "csv"])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [float(r["p"]) for r in rows] == [2.0, 2.5, 3.0, 3.5, 4.0]
    for row in rows:
        assert float(row["refined_margin"]) >= 0
        assert float(row["refined_rhs"]) < float(row["classical_rhs"])
        assert row["verdict"] in ("Holds", "HoldsWithinError")
