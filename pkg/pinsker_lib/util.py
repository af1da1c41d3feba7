"""Utility functions"""

import math
import re

from scipy import stats

from .const import REAL_FORMAT


def is_power_of_two(value):
    """True for 1, 2, 4, ..."""
    return isinstance(value, int) and value > 0 and value & (value - 1) == 0


def next_power_of_two(value):
    """Smallest power of two that is >= value."""
    value = max(int(math.ceil(value)), 1)
    return 1 << (value - 1).bit_length()


def format_real(value):
    """Format a real with enough digits to round-trip a double."""
    return REAL_FORMAT % value


def parse_value(text):
    """Parse a config value: bool, int, float, comma list or string."""
    text = text.strip()
    lowered = text.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    if lowered in ("none", ""):
        return None
    if "," in text:
        return tuple(parse_value(item) for item in re.split(r"\s*,\s*", text) if item)
    for convert in (int, float):
        try:
            return convert(text)
        except ValueError:
            pass
    return text


def parse_number_list(text):
    """Parse '1e3,1e4' or '10, 20' into a tuple of numbers (ints when integral)."""
    values = []
    for item in re.split(r"\s*,\s*", str(text).strip()):
        if not item:
            continue
        number = float(item)
        values.append(int(number) if number.is_integer() else number)
    if not values:
        raise ValueError("Empty number list '%s'" % text)
    return tuple(values)


def parse_flags(flags):
    """Parse flags of the form 'a, b=1, c=x' into a dict."""
    flags = re.split(r"\s*,\s*", flags)
    return_value = {}
    for flag in flags:
        if not flag:
            continue
        flag = re.split(r"\s*=\s*", flag)
        if len(flag) == 1:
            return_value[flag[0]] = True
        elif len(flag) == 2:
            return_value[flag[0]] = parse_value(flag[1])
    return return_value


def wilson_interval(successes, trials, z=None):
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("Wilson interval needs trials > 0, got %s" % trials)
    if z is None:
        z = stats.norm.ppf(0.975)
    phat = successes / trials
    denom = 1.0 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials))
    half /= denom
    return (max(0.0, centre - half), min(1.0, centre + half))


def compensated_mean(values):
    """Mean with compensated summation; independent of how values were produced."""
    values = list(values)
    if not values:
        raise ValueError("Mean of an empty sequence")
    return math.fsum(values) / len(values)


def schedule_half_support(n, floor):
    """Half-support A = ceil(ln n), never below floor."""
    return max(int(math.ceil(math.log(n))), floor)
