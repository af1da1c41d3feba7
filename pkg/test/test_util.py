import math

import pytest

from pinsker_lib.util import (
    compensated_mean,
    is_power_of_two,
    next_power_of_two,
    parse_flags,
    parse_number_list,
    parse_value,
    schedule_half_support,
    wilson_interval,
)


def test_parse_flags_one_simple_flag():
    flags = parse_flags("foo")
    assert flags["foo"] == True


def test_parse_flags_two_simple_flags():
    flags = parse_flags("foo, yaa")
    assert flags == {"foo": True, "yaa": True}


def test_parse_flags_one_assigned_flag():
    flags = parse_flags("the_answer = 42")
    assert flags == {"the_answer": 42}


def test_parse_flags_two_assigned_flags():
    flags = parse_flags("seed = 42, density=gaussian")
    assert flags == {"seed": 42, "density": "gaussian"}


def test_parse_flags_complex_flags():
    flags = parse_flags("verbose, seed=42, quiet, eps=0.25")
    assert flags == {"verbose": True, "quiet": True, "seed": 42, "eps": 0.25}


def test_parse_value_types():
    assert parse_value("7") == 7
    assert parse_value("1e3") == 1000.0
    assert parse_value(" true ") is True
    assert parse_value("off") is False
    assert parse_value("none") is None
    assert parse_value("tapered-gaussian") == "tapered-gaussian"


def test_parse_number_list():
    assert parse_number_list("1e3, 1e4,1e5") == (1000, 10000, 100000)
    assert parse_number_list("0.75,1.5") == (0.75, 1.5)
    with pytest.raises(ValueError):
        parse_number_list(" , ")


def test_powers_of_two():
    assert is_power_of_two(1)
    assert is_power_of_two(2**14)
    assert not is_power_of_two(0)
    assert not is_power_of_two(12)
    assert next_power_of_two(1000) == 1024
    assert next_power_of_two(1024) == 1024
    assert next_power_of_two(1024.5) == 2048


def test_wilson_interval_zero_successes():
    low, high = wilson_interval(0, 10000)
    assert low == 0.0
    assert 3.0e-4 < high < 4.5e-4


def test_wilson_interval_contains_estimate():
    low, high = wilson_interval(30, 100)
    assert low < 0.3 < high
    with pytest.raises(ValueError):
        wilson_interval(0, 0)


def test_compensated_mean_is_order_free():
    values = [1e16, 1.0, -1e16, 1.0] * 10
    assert compensated_mean(values) == compensated_mean(reversed(values)) == 0.5


def test_schedule_half_support():
    assert schedule_half_support(10**6, 4) == math.ceil(math.log(10**6)) == 14
    assert schedule_half_support(10, 4) == 4
