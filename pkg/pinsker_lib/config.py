"""
  Experiment configuration: typed fields, `key = value` text files and
  PINSKER_* environment overrides.
"""

import hashlib
import logging
import os

import attr

from .const import (
    DEFAULT_GRID_POINTS,
    DEFAULT_PADDING,
    DEFAULT_VARIANCE_SCALE,
    ENV_PREFIX,
    KERNEL_TAIL_TOL,
    Command,
    DensityKind,
    XiLawKind,
)
from .errors import ConfigError
from .util import format_real, is_power_of_two, parse_number_list, parse_value

LOG = logging.getLogger(__name__)


def _text(value):
    if value is None:
        return None
    value = str(value).strip()
    return None if value.lower() in ("", "none") else value


def _real(value):
    return float(value)


def _integer(value):
    number = float(value)
    if not number.is_integer():
        raise ValueError("Expected an integer, got '%s'" % value)
    return int(number)


def _reals(value):
    if isinstance(value, str):
        value = parse_number_list(value)
    elif not isinstance(value, (list, tuple)):
        value = (value,)
    return tuple(float(item) for item in value)


def _integers(value):
    if isinstance(value, str):
        value = parse_number_list(value)
    elif not isinstance(value, (list, tuple)):
        value = (value,)
    return tuple(_integer(item) for item in value)


def _choice(enum):
    def convert(value):
        return enum(value.value if isinstance(value, enum) else str(value).strip()).value

    return convert


def _flag(value):
    if isinstance(value, str):
        value = parse_value(value)
    return bool(value)


def _grid_size(instance, attribute, value):
    if not is_power_of_two(value) or value < 2:
        raise ConfigError("grid_points must be a power of two, got %s" % value)


def _positive(instance, attribute, value):
    if not value > 0:
        raise ConfigError("%s must be > 0, got %s" % (attribute.name, value))


def _field(default, convert, validator=None):
    return attr.ib(default=default, converter=convert, validator=validator)


@attr.s(frozen=True)
class ExperimentConfig:
    """Every parameter a harness command reads."""

    command = _field(Command.PINSKER.value, _choice(Command))
    beta = _field((1.0,), _reals)
    L = _field((1.0,), _reals)
    n_list = _field((1000, 10000, 100000), _integers)
    n = _field(1000000, _integer)
    replications = _field(200, _integer)
    eps = _field(0.01, _real)
    A_list = _field((10, 20, 40), _integers)
    budget = _field(1000, _integer)
    trials = _field(10000, _integer)
    density = _field(DensityKind.GAUSSIAN.value, _choice(DensityKind))
    xi_law = _field(XiLawKind.TAPERED_GAUSSIAN.value, _choice(XiLawKind))
    variance_scale = _field(DEFAULT_VARIANCE_SCALE, _real)
    seed = _field(0, _integer)
    workers = _field(0, _integer)
    grid_points = _field(DEFAULT_GRID_POINTS, _integer, _grid_size)
    padding = _field(DEFAULT_PADDING, _real)
    kernel_tail_tol = _field(KERNEL_TAIL_TOL, _real, _positive)
    out = _field(None, _text)
    suite = _field("primary", _text)
    verbose = _field(False, _flag)

    @classmethod
    def keys(cls):
        """Field names in canonical order."""
        return [field.name for field in attr.fields(cls)]

    @classmethod
    def build(cls, values):
        """Config from a mapping; unknown keys and bad values raise ConfigError."""
        unknown = set(values) - set(cls.keys())
        if unknown:
            raise ConfigError("Unknown config key(s) %s" % ", ".join(sorted(unknown)))
        try:
            return cls(**values)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError("Invalid config value: %s" % exc) from exc

    def merged(self, values):
        """Copy with the non-None entries of `values` applied."""
        values = {key: value for key, value in values.items() if value is not None}
        base = attr.asdict(self)
        base.update(values)
        return ExperimentConfig.build(base)

    @property
    def worker_count(self):
        """Resolved worker count; 0 means all cores."""
        return self.workers if self.workers > 0 else (os.cpu_count() or 1)

    def to_text(self):
        """Canonical `key = value` text; floats keep 17 significant digits."""
        lines = []
        for key, value in attr.asdict(self, retain_collection_types=True).items():
            lines.append("%s = %s" % (key, _format(value)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text, base=None):
        """Parse `key = value` lines ('#' starts a comment) on top of `base`."""
        values = {}
        for number, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError("Line %d is not 'key = value': '%s'" % (number, line))
            key, raw = (part.strip() for part in line.split("=", 1))
            values[key] = raw
        return (base or cls()).merged(values)

    @classmethod
    def from_file(cls, filename, base=None):
        """Read a config file."""
        with open(filename) as file_handle:
            return cls.from_text(file_handle.read(), base)

    def with_environment(self, environ=None):
        """Apply PINSKER_<KEY> overrides."""
        if environ is None:
            environ = os.environ
        values = {}
        for key in self.keys():
            name = ENV_PREFIX + key.upper()
            if name in environ:
                LOG.debug("Config %s taken from %s", key, name)
                values[key] = environ[name]
        return self.merged(values)

    def digest(self):
        """SHA-256 of the canonical text."""
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()


def _format(value):
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_real(value)
    if isinstance(value, tuple):
        return ", ".join(_format(item) for item in value)
    return str(value)


def resolve_config(flags, config_file=None, environ=None):
    """defaults < config file < environment < command-line flags."""
    config = ExperimentConfig()
    if config_file is not None:
        config = ExperimentConfig.from_file(config_file, config)
    config = config.with_environment(environ)
    return config.merged(flags)
