# pylint: disable=redefined-outer-name
import csv

import pytest

from aettools.cli.checks import CheckSuite, check_case, flipped_adjoint
from aettools.exceptions import CheckFailure
from aettools.models.experiment import ExperimentConfig


@check_case
def dummy_check(_, returns, raise_exception=None):
    """Dummy check that returns what is passed to it, optionally raising an
    exception.

    """
    if raise_exception:
        raise raise_exception

    return returns


@pytest.fixture
def check_config(check_yaml):
    return ExperimentConfig.from_file(check_yaml)


@pytest.fixture
def suite(check_config):
    return CheckSuite(check_config, verbosity=-1)


def test_successful_check(suite):
    """Check check_case under normal conditions."""
    output = dummy_check(suite, ([1, 2, 3], "message"))
    assert suite.results.success_count == 1
    assert suite.results.failure_count == 0
    assert suite.results.internal_failure_count == 0
    assert output == ([1, 2, 3], "message")


def test_failed_check(suite):
    """Check that a raised `CheckFailure` counts as a failure."""
    output = dummy_check(
        suite, (None, "message"), raise_exception=CheckFailure("too large")
    )
    assert suite.results.success_count == 0
    assert suite.results.failure_count == 1
    assert suite.results.internal_failure_count == 0
    assert output == (None, "too large")
    assert suite.results.failure_messages[0][0] == "dummy_check - failed"
    assert not suite.results.passed


def test_internal_failure(suite):
    """Check that any other exception counts as an internal failure."""
    output = dummy_check(suite, (None, "message"), raise_exception=ZeroDivisionError("oops"))
    assert suite.results.failure_count == 0
    assert suite.results.internal_failure_count == 1
    assert output[0] is None
    assert output[1] == "ZeroDivisionError: oops"
    assert "internal error" in suite.results.internal_failure_messages[0][0]


def test_traceback_at_high_verbosity(check_config):
    suite = CheckSuite(check_config, verbosity=2)
    dummy_check(suite, (None, "message"), raise_exception=ValueError("bad"))
    assert "Traceback" in suite.results.internal_failure_messages[0][1]


def test_suite_passes(check_config, tmp_path):
    """The correct operators pass every check and the rows are written."""
    results = CheckSuite(check_config, verbosity=-1).run()
    assert results.passed, results.failure_messages + results.internal_failure_messages
    assert results.success_count == 7
    checks = {row.check for row in results.rows}
    assert checks == {
        "forward_physics",
        "adjoint_scem",
        "adjoint_dcm",
        "taylor",
        "gram",
        "normal",
        "electrode_edges",
    }
    # two patterns for each of two draws
    assert sum(row.check == "adjoint_scem" for row in results.rows) == 4

    path = results.write_csv(tmp_path / "checks.csv")
    with open(path, newline="", encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == len(results.rows)
    assert set(rows[0]) == {"check", "draw", "quantity", "value", "limit", "passed"}
    assert all(row["passed"] == "True" for row in rows)


def test_flipped_adjoint_is_rejected(check_config):
    """A wrong adjoint fails both adjoint checks and nothing else."""
    results = CheckSuite(check_config, verbosity=-1, adjoint_hook=flipped_adjoint).run()
    assert not results.passed
    assert results.failure_count == 2
    assert results.internal_failure_count == 0
    summaries = [summary for summary, _ in results.failure_messages]
    assert summaries == ["check_adjoint_identity - failed"] * 2
    assert all("adjoint identity violated" in msg for _, msg in results.failure_messages)


def test_gram_failure_is_reported(check_config, monkeypatch):
    """An unreachable refinement ratio turns into a recorded failure."""
    import aettools.cli.checks

    monkeypatch.setattr(aettools.cli.checks, "_GRAM_MIN_RATIO", 1e6)
    suite = CheckSuite(check_config, verbosity=-1)
    result, message = suite.check_gram()
    assert result is None
    assert "decreased only by" in message
    assert suite.results.failure_count == 1
    assert any(
        row.quantity == "refinement_ratio" and not row.passed
        for row in suite.results.rows
    )
