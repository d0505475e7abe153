import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from parityformer.encoding import (
    AlternatingSign,
    Constant,
    InverseQuadratic,
    Telescope,
    alpha_fraction,
    telescope_value,
    temperature,
)
from parityformer.scalar import MPBackend


class Neumaier:
    def __init__(self):
        self.s = 0.0
        self.c = 0.0

    def add(self, x):
        t = self.s + x
        if abs(self.s) >= abs(x):
            self.c += (self.s - t) + x
        else:
            self.c += (x - t) + self.s
        self.s = t

    @property
    def total(self):
        return self.s + self.c


def test_telescope_ln_examples():
    assert telescope_value(math.log, 1) == 0.0
    assert telescope_value(math.log, 2) == pytest.approx(1.38629436111989061883, rel=1e-15)
    with pytest.raises(ValueError):
        telescope_value(math.log, 0)


def test_telescope_mean_is_exact_in_high_precision():
    mp = MPBackend(300)
    rule = Telescope("ln_n")
    mean = mp.fsum(rule(i, mp) for i in (1, 2, 3)) / 3
    assert abs(mean - mp.log(3)) < mp.eps * 4


def test_integer_telescope_is_exact():
    rule = Telescope("temperature")
    total = sum(int(rule(i)) for i in range(1, 51))
    assert total == 50 * temperature(50)


def test_temperature_examples():
    # ceil(200 ln 6) and ceil(800 ln 12), checked with 60-digit mpmath
    assert temperature(1) == 359
    assert temperature(2) == 1988
    assert temperature(3) == 5203
    with pytest.raises(ValueError):
        temperature(0)


def test_temperature_strictly_increasing():
    values = [temperature(n) for n in range(1, 10_002)]
    assert all(b > a for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("function", ["ln_n", "alpha_over_n", "alpha2_over_n2", "temperature"])
def test_running_mean_tracks_target(function):
    rule = Telescope(function)
    acc = Neumaier()
    for n in range(1, 2001):
        acc.add(float(rule(n)))
        target = float(rule.target(n))
        mean = acc.total / n
        if target == 0.0:
            assert mean == 0.0
        else:
            assert abs(mean - target) / abs(target) <= 1e-9


@given(st.integers(1, 10 ** 6))
def test_rules_are_total_functions_of_position(i):
    for rule in (Constant(1.0), AlternatingSign(), InverseQuadratic(0.01),
                 Telescope("ln_n"), Telescope("alpha_over_n"), Telescope("alpha2_over_n2")):
        assert math.isfinite(float(rule(i)))
    assert AlternatingSign()(i) == (-1) ** i


def test_unknown_telescope_function():
    with pytest.raises(ValueError, match="unknown telescope function"):
        Telescope("sqrt_n")


def test_alpha_fraction_reads_the_decimal():
    assert alpha_fraction(0.01) == alpha_fraction("0.01") == pytest.approx(0.01)
    assert alpha_fraction(0.01).denominator == 100
    assert alpha_fraction(0.2).denominator == 5
