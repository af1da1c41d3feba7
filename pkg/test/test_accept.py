import logging
import math

import pytest

from pinsker_lib import accept, harness
from pinsker_lib.errors import AcceptanceError, GridError, SymmetryError


def _passing(suite, seed, workers):
    return 0.5, "fine"


def _rejecting(suite, seed, workers):
    accept.require(False, 2, "gap too large")


def _crashing(suite, seed, workers):
    raise SymmetryError("Spectrum is not Hermitian (defect 1.16e-08 > 1e-08)")


@pytest.fixture
def criteria(monkeypatch):
    table = {1: _passing, 2: _rejecting, 3: _crashing, 4: _passing}
    monkeypatch.setattr(accept, "CRITERIA", table)
    return table


def test_suite_continues_after_a_library_error(criteria):
    results = accept.run_suite("smoke", 0, 1)
    assert [result.criterion for result in results] == [1, 2, 3, 4]
    assert [result.passed for result in results] == [True, False, False, True]
    assert results[1].detail == "gap too large"
    assert results[2].detail.startswith("SymmetryError: Spectrum is not Hermitian")
    assert math.isnan(results[2].value)


def test_suite_runs_selected_criteria(criteria):
    results = accept.run_suite("smoke", 0, 1, numbers=[4, 3])
    assert [result.criterion for result in results] == [3, 4]


def test_unknown_suite():
    with pytest.raises(AcceptanceError):
        accept.run_suite("nightly")


def test_accept_command_names_a_crashing_criterion(monkeypatch, caplog, capsys):
    monkeypatch.setattr(accept, "CRITERIA", {1: _passing, 3: _crashing})
    with caplog.at_level(logging.ERROR):
        assert harness.main(["accept", "--suite", "smoke"]) == 1
    assert "criterion 3 failed: SymmetryError" in caplog.text
    assert "criterion 3: FAILED" in capsys.readouterr().out


def test_non_library_errors_propagate(monkeypatch):
    def broken(suite, seed, workers):
        raise ZeroDivisionError

    monkeypatch.setattr(accept, "CRITERIA", {1: broken})
    with pytest.raises(ZeroDivisionError):
        accept.run_suite("smoke")


def test_grid_errors_are_recorded(monkeypatch):
    def coarse(suite, seed, workers):
        raise GridError("refine the grid")

    monkeypatch.setattr(accept, "CRITERIA", {5: coarse})
    (result,) = accept.run_suite("smoke")
    assert not result.passed
    assert result.detail == "GridError: refine the grid"
