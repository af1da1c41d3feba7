import os

import pytest

from pinsker_lib.config import ExperimentConfig, resolve_config
from pinsker_lib.const import Command
from pinsker_lib.errors import ConfigError


def test_defaults():
    config = ExperimentConfig()
    assert config.command == "pinsker"
    assert config.beta == (1.0,)
    assert config.n_list == (1000, 10000, 100000)
    assert config.xi_law == "tapered-gaussian"
    assert config.variance_scale == 2.0
    assert config.out is None
    assert not config.verbose


def test_text_round_trip():
    config = ExperimentConfig(beta=(0.1 + 0.2, 2.0), eps=1 / 3, out="runs/a", verbose=True)
    text = config.to_text()
    assert "beta = 0.30000000000000004, 2" in text
    assert ExperimentConfig.from_text(text) == config


def test_from_text_converts_values():
    config = ExperimentConfig.from_text(
        """
        # sweep settings
        command = theorem2
        beta = 1.5, 2
        n = 1e6      # one million
        A_list = 10,20
        out = none
        """
    )
    assert config.command == "theorem2"
    assert config.beta == (1.5, 2.0)
    assert config.n == 1000000
    assert config.A_list == (10, 20)
    assert config.out is None


def test_enum_values_are_accepted():
    assert ExperimentConfig(command=Command.RISK).command == "risk"


@pytest.mark.parametrize(
    "text",
    [
        "n = 1.5",
        "grid_points = 1000",
        "command = bogus",
        "bandwidth = 2",
        "seed 7",
        "beta = ,",
    ],
)
def test_bad_config_text(text):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text(text)


def test_environment_overrides():
    config = ExperimentConfig().with_environment(
        {"PINSKER_SEED": "7", "PINSKER_BETA": "2, 3", "OTHER_SEED": "9"}
    )
    assert config.seed == 7
    assert config.beta == (2.0, 3.0)


def test_precedence(tmp_path):
    config_file = tmp_path / "run.cfg"
    config_file.write_text("seed = 1\neps = 0.1\nreplications = 50\n")
    environ = {"PINSKER_SEED": "2", "PINSKER_EPS": "0.2"}
    config = resolve_config({"seed": 3, "eps": None}, str(config_file), environ)
    assert config.seed == 3
    assert config.eps == 0.2
    assert config.replications == 50
    assert resolve_config({}, None, {}).seed == 0


def test_missing_config_file(tmp_path):
    with pytest.raises(OSError):
        resolve_config({}, str(tmp_path / "absent.cfg"), {})


def test_digest_follows_the_canonical_text():
    assert ExperimentConfig().digest() == ExperimentConfig().digest()
    assert ExperimentConfig(seed=1).digest() != ExperimentConfig().digest()
    assert len(ExperimentConfig().digest()) == 64


def test_worker_count():
    assert ExperimentConfig(workers=3).worker_count == 3
    assert ExperimentConfig().worker_count == (os.cpu_count() or 1)


def test_merged_skips_none():
    config = ExperimentConfig(seed=5).merged({"seed": None, "n": 10})
    assert config.seed == 5
    assert config.n == 10


def test_kernel_tail_tolerance():
    assert ExperimentConfig().kernel_tail_tol == 1e-6
    assert ExperimentConfig.from_text("kernel_tail_tol = 1e-3").kernel_tail_tol == 1e-3
    with pytest.raises(ConfigError):
        ExperimentConfig.build({"kernel_tail_tol": 0})
