"""Length-independent positional encodings.

Every rule is a function of the position ``i`` alone.  Telescoping rules
realise a function ``f`` of the sequence length: their running average over
positions ``1..n`` equals ``f(n)``, so one uniform-attention layer reads
``f(n)`` off at every position.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .scalar import FLOAT64


def alpha_text(alpha):
    """Shortest decimal spelling of ``alpha`` (what documents store)."""
    return repr(float(alpha))


def alpha_fraction(alpha):
    """``alpha`` as the exact rational its decimal spelling denotes."""
    return Fraction(alpha_text(alpha))


def temperature(n, alpha=0.01):
    """Layer-3 inverse temperature ``ceil((2 n^2 / alpha) * ln(6 n))``.

    Large enough that the softmax over the coefficients lands within 1/3
    of the parity sign: the winning coefficient beats every other one by at
    least ``alpha / (2 n^2)``, so the losing mass is at most
    ``2 (n - 1) exp(-ln(6 n)) < 1/3``.
    """
    if n < 1:
        raise ValueError("temperature is defined for n >= 1")
    return math.ceil((2 * n * n / float(alpha)) * math.log(6 * n))


def _ln_n(n, alpha, backend):
    return backend.log(backend.scalar(n))


def _temperature(n, alpha, backend):
    return temperature(n, alpha)


def _alpha_over_n(n, alpha, backend):
    a = backend.scalar(alpha_text(alpha))
    return a / n


def _alpha2_over_n2(n, alpha, backend):
    a = backend.scalar(alpha_text(alpha))
    return a * a / (n * n)


TELESCOPE_FUNCTIONS = {
    "ln_n": _ln_n,
    "temperature": _temperature,
    "alpha_over_n": _alpha_over_n,
    "alpha2_over_n2": _alpha2_over_n2,
}


def telescope_value(f, i, backend=FLOAT64):
    """``p(i)`` with ``p(1) = f(1)`` and ``p(i) = i f(i) - (i-1) f(i-1)``.

    Integer-valued ``f`` is telescoped in exact integer arithmetic before
    conversion.
    """
    if i < 1:
        raise ValueError("telescope positions start at 1")
    if i == 1:
        value = f(1)
    else:
        value = i * f(i) - (i - 1) * f(i - 1)
    if isinstance(value, int):
        return backend.scalar(value)
    return value


@dataclass(frozen=True)
class Constant:
    value: float
    tag = "constant"

    def __call__(self, i, backend=FLOAT64):
        return backend.scalar(self.value)

    def params(self):
        return {"value": self.value}


@dataclass(frozen=True)
class AlternatingSign:
    tag = "alternating_sign"

    def __call__(self, i, backend=FLOAT64):
        return backend.scalar(-1 if i % 2 else 1)

    def params(self):
        return {}


@dataclass(frozen=True)
class InverseQuadratic:
    """``i -> alpha/i - alpha^2/i^2``."""

    alpha: float
    tag = "inverse_quadratic"

    def __call__(self, i, backend=FLOAT64):
        a = backend.scalar(alpha_text(self.alpha))
        return a / i - a * a / (i * i)

    def params(self):
        return {"alpha": self.alpha}


@dataclass(frozen=True)
class Telescope:
    function: str
    alpha: float = 0.01
    tag = "telescope"

    def __post_init__(self):
        if self.function not in TELESCOPE_FUNCTIONS:
            raise ValueError(f"unknown telescope function {self.function!r}")

    def target(self, n, backend=FLOAT64):
        """The length function ``f(n)`` this rule averages to."""
        return TELESCOPE_FUNCTIONS[self.function](n, self.alpha, backend)

    def __call__(self, i, backend=FLOAT64):
        return telescope_value(lambda k: self.target(k, backend), i, backend)

    def params(self):
        return {"function": self.function, "alpha": self.alpha}


RULE_TYPES = {
    cls.tag: cls for cls in (Constant, AlternatingSign, InverseQuadratic, Telescope)
}
