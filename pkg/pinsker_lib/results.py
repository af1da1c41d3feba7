"""CSV result tables with '#' metadata headers, and grid/spectrum CSV files."""

import csv
import datetime
import io
import logging

import attr
import numpy as np
import pytz

from . import __version__
from .errors import GridError
from .grid import Grid, GridFunction, SpectralFunction
from .util import format_real

LOG = logging.getLogger(__name__)


def _cell(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format_real(float(value))
    if value is None:
        return ""
    return str(value)


def _parse_cell(text):
    for convert in (int, float):
        try:
            return convert(text)
        except ValueError:
            pass
    return text


@attr.s
class ResultTable:
    """Ordered rows of named columns plus a metadata header."""

    columns = attr.ib(converter=list)
    rows = attr.ib(factory=list)
    metadata = attr.ib(factory=dict)

    def add_row(self, row):
        """Append a row given as a mapping or a sequence in column order."""
        if isinstance(row, dict):
            missing = [column for column in self.columns if column not in row]
            if missing:
                raise ValueError("Row lacks column(s) %s" % ", ".join(missing))
            row = [row[column] for column in self.columns]
        elif len(row) != len(self.columns):
            raise ValueError("Row has %d cells, table has %d columns" % (len(row), len(self.columns)))
        self.rows.append(list(row))

    def column(self, name):
        """Values of one column."""
        index = self.columns.index(name)
        return [row[index] for row in self.rows]

    def body_text(self):
        """Header row and data rows, without metadata."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_cell(value) for value in row])
        return buffer.getvalue()

    def to_text(self):
        """Metadata lines followed by the CSV body."""
        lines = []
        for key, value in self.metadata.items():
            if key == "config":
                lines.extend("# config: %s" % line for line in value.splitlines())
            else:
                lines.append("# %s: %s" % (key, _cell(value)))
        return "".join(line + "\n" for line in lines) + self.body_text()

    def write(self, filename):
        """Write the table to a file."""
        with open(filename, "w", newline="") as file_handle:
            file_handle.write(self.to_text())
        LOG.debug("Wrote %d rows to %s", len(self.rows), filename)

    @classmethod
    def from_text(cls, text):
        """Parse text produced by to_text."""
        metadata = {}
        config = []
        body = []
        for line in text.splitlines():
            if line.startswith("# config: "):
                config.append(line[len("# config: ") :])
            elif line.startswith("# "):
                key, _, value = line[2:].partition(": ")
                metadata[key] = value
            elif line.strip():
                body.append(line)
        if config:
            metadata["config"] = "\n".join(config) + "\n"
        reader = csv.reader(body)
        columns = next(reader)
        rows = [[_parse_cell(cell) for cell in row] for row in reader]
        return cls(columns, rows, metadata)

    @classmethod
    def read(cls, filename):
        """Read a table written by write."""
        with open(filename, newline="") as file_handle:
            return cls.from_text(file_handle.read())


def run_metadata(config, command=None):
    """Header entries for a run: version, command, config digest, seed, UTC timestamp, config."""
    return {
        "version": __version__,
        "command": command or config.command,
        "digest": config.digest(),
        "seed": config.seed,
        "timestamp": datetime.datetime.now(pytz.utc).isoformat(timespec="seconds"),
        "config": config.to_text(),
    }


def grid_function_table(f, metadata=None):
    """x,value table of a grid function."""
    table = ResultTable(["x", "value"], metadata=dict(metadata or {}))
    for x, value in zip(f.x, f.values):
        table.add_row([float(x), float(value)])
    return table


def spectrum_table(spectrum, metadata=None):
    """omega,re,im table of a spectral function."""
    table = ResultTable(["omega", "re", "im"], metadata=dict(metadata or {}))
    for omega, value in zip(spectrum.omegas, spectrum.values):
        table.add_row([float(omega), float(value.real), float(value.imag)])
    return table


def _uniform_step(points):
    steps = np.diff(points)
    step = float(np.mean(steps))
    if not np.allclose(steps, step, rtol=1e-9, atol=0):
        raise GridError("Samples are not uniformly spaced")
    return step


def grid_function_from_table(table):
    """Rebuild a GridFunction from an x,value table."""
    x = np.array(table.column("x"), dtype=np.float64)
    step = _uniform_step(x)
    grid = Grid(x[0], x[0] + len(x) * step, len(x))
    return GridFunction(grid, table.column("value"))


def spectrum_from_table(table):
    """Rebuild a SpectralFunction from an omega,re,im table."""
    omegas = np.array(table.column("omega"), dtype=np.float64)
    _uniform_step(omegas)
    values = np.array(table.column("re")) + 1j * np.array(table.column("im"))
    return SpectralFunction(-omegas[0], values)
