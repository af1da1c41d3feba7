import numpy as np
import pytest

from pinsker_lib import __version__
from pinsker_lib.config import ExperimentConfig
from pinsker_lib.errors import GridError
from pinsker_lib.grid import Grid, GridFunction, SpectralFunction
from pinsker_lib.results import (
    ResultTable,
    grid_function_from_table,
    grid_function_table,
    run_metadata,
    spectrum_from_table,
    spectrum_table,
)


def test_add_row_checks_columns():
    table = ResultTable(["n", "mise"])
    table.add_row({"n": 10, "mise": 0.5, "extra": 1})
    table.add_row([20, 0.25])
    assert table.column("mise") == [0.5, 0.25]
    with pytest.raises(ValueError):
        table.add_row({"n": 30})
    with pytest.raises(ValueError):
        table.add_row([1, 2, 3])


def test_table_text_round_trip():
    config = ExperimentConfig(seed=4)
    table = ResultTable(["n", "value", "label", "ok"], metadata=run_metadata(config, "risk"))
    table.add_row([100, 0.1 + 0.2, "gaussian", True])
    text = table.to_text()
    assert "0.30000000000000004" in text
    assert text.startswith("# version: %s\n" % __version__)
    parsed = ResultTable.from_text(text)
    assert parsed.columns == table.columns
    assert parsed.rows == [[100, 0.1 + 0.2, "gaussian", "true"]]
    assert parsed.metadata["command"] == "risk"
    assert parsed.metadata["seed"] == "4"
    assert ExperimentConfig.from_text(parsed.metadata["config"]) == config


def test_write_and_read(tmp_path):
    table = ResultTable(["k", "theta"], metadata={"note": "probe"})
    table.add_row([-3, 1e-300])
    filename = tmp_path / "table.csv"
    table.write(str(filename))
    parsed = ResultTable.read(str(filename))
    assert parsed.rows == [[-3, 1e-300]]
    assert parsed.metadata == {"note": "probe"}


def test_run_metadata():
    config = ExperimentConfig(command="kernel", seed=9)
    metadata = run_metadata(config)
    assert metadata["command"] == "kernel"
    assert metadata["digest"] == config.digest()
    assert metadata["seed"] == 9
    assert metadata["timestamp"].endswith("+00:00")
    assert metadata["config"] == config.to_text()


def test_grid_function_table_round_trip():
    grid = Grid(-1.0, 1.0, 8)
    f = GridFunction(grid, np.linspace(0.0, 1.0, 8) ** 2)
    table = ResultTable.from_text(grid_function_table(f).to_text())
    rebuilt = grid_function_from_table(table)
    assert rebuilt.n_points == 8
    assert rebuilt.grid.lo == -1.0
    assert rebuilt.grid.hi == pytest.approx(1.0)
    assert np.array_equal(rebuilt.values, f.values)


def test_spectrum_table_round_trip():
    values = np.array([0.0, 0.5 - 0.25j, 1.0, 0.5 + 0.25j])
    spectrum = SpectralFunction(4.0, values)
    rebuilt = spectrum_from_table(ResultTable.from_text(spectrum_table(spectrum).to_text()))
    assert rebuilt.omega_max == 4.0
    assert np.array_equal(rebuilt.values, values)


def test_uneven_samples_are_rejected():
    table = ResultTable(["x", "value"])
    for x in (0.0, 0.1, 0.3):
        table.add_row([x, 1.0])
    with pytest.raises(GridError):
        grid_function_from_table(table)
