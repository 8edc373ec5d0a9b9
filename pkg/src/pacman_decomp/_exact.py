from decimal import Decimal
from fractions import Fraction
import numbers

import numpy as np


def as_fraction(x):
    """Convert a number to an exact Fraction.

    Floats go through their shortest repr, so ``0.1`` becomes ``1/10``
    rather than the nearest binary value. Strings accept anything
    ``Fraction`` parses (``"1/3"``, ``"2.5e-1"``).
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (bool, np.bool_)):
        raise TypeError("boolean is not a number")
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if x != x or x in (float("inf"), float("-inf")):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(repr(x))
    if isinstance(x, Decimal):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, numbers.Rational):
        return Fraction(x.numerator, x.denominator)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact number")


def fmt(x):
    """Deterministic text form of a number for CSV output."""
    return repr(float(x))
