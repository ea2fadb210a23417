"""Value types for the general nth-order plant, its controller and closed-loop polynomial.

Coefficients are kept as given (floats, ints or `fractions.Fraction`) so that
the coefficient algebra stays exact whenever the inputs allow it.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from numbers import Real

import numpy as np

from helictl.errors import DimensionError


def _finite(values: Sequence[Real], what: str) -> tuple[Real, ...]:
    out = tuple(values)
    for v in out:
        if not np.isfinite(float(v)):
            raise ValueError(f"{what} must be finite, got {v!r}")
    return out


@dataclass(frozen=True)
class PlantCoeffs:
    """x^(n) + a_n x^(n-1) + ... + a_1 x = u + T, with a = [a_1..a_n]."""

    a: tuple[Real, ...]

    def __post_init__(self) -> None:
        a = _finite(self.a, "plant coefficients")
        if len(a) < 1:
            raise DimensionError("plant order must be >= 1")
        object.__setattr__(self, "a", a)

    @property
    def order(self) -> int:
        return len(self.a)


@dataclass(frozen=True)
class ControllerGains:
    """u = -b0*∫(x - x_d) - b_1 (x - x_d) - sum_{i>=2} b_i x^(i-1)."""

    b0: Real
    b: tuple[Real, ...]

    def __post_init__(self) -> None:
        b = _finite(self.b, "controller gains")
        _finite((self.b0,), "integral gain")
        if len(b) < 1:
            raise DimensionError("controller needs at least the proportional gain b_1")
        object.__setattr__(self, "b", b)

    @property
    def order(self) -> int:
        return len(self.b)


@dataclass(frozen=True)
class CharPoly:
    """Monic polynomial, ascending powers: coeffs[i] multiplies s**i, coeffs[-1] == 1."""

    coeffs: tuple[Real, ...]

    def __post_init__(self) -> None:
        c = _finite(self.coeffs, "polynomial coefficients")
        if len(c) < 2:
            raise ValueError("polynomial degree must be >= 1")
        if c[-1] != 1:
            raise ValueError(f"polynomial must be monic, leading coefficient is {c[-1]!r}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def monic(cls, coeffs: Sequence[Real]) -> "CharPoly":
        """Normalise by the leading coefficient (trailing zeros of the array are dropped)."""
        c = list(coeffs)
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        lead = c[-1]
        if lead == 0:
            raise ValueError("zero polynomial has no monic form")
        if lead == 1:
            return cls(tuple(c))
        return cls(tuple(v / lead for v in c[:-1]) + (1,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def as_array(self) -> np.ndarray:
        return np.asarray([float(v) for v in self.coeffs], dtype=float)

    def __call__(self, s: complex | np.ndarray) -> complex | np.ndarray:
        return np.polynomial.polynomial.polyval(s, self.as_array())
