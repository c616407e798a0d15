"""Arbitrary-precision context shared by the game engine and strategies.

All referee geometry and strategy arithmetic runs on mpmath reals at a
configurable binary precision.  The comparison tolerance ``tau`` shrinks with
the precision so that every inequality in the engine can be made conservative:
ties within ``tau`` (scaled to the quantities compared) are resolved against
the stronger claim.
"""

from __future__ import annotations

import os
from fractions import Fraction
from typing import Iterable, Sequence, Union

from mpmath import mp, mpf

DEFAULT_PRECISION_BITS = 212
PRECISION_ENV_VAR = "SG_PRECISION_BITS"

Real = mpf
Number = Union[int, float, str, Fraction, mpf]


def set_precision(bits: int) -> None:
    """Set the working binary precision for all subsequent arithmetic."""
    if bits < 53:
        raise ValueError(f"precision must be at least 53 bits, got {bits}")
    mp.prec = bits


def configured_precision_bits(config_value: int | None = None) -> int:
    """Resolve the precision: the environment variable wins over the config."""
    env = os.environ.get(PRECISION_ENV_VAR)
    if env is not None:
        return int(env)
    if config_value is not None:
        return int(config_value)
    return DEFAULT_PRECISION_BITS


def init_precision(config_value: int | None = None) -> int:
    bits = configured_precision_bits(config_value)
    set_precision(bits)
    return bits


def tau() -> mpf:
    """Comparison tolerance at the current precision: 2^(-prec/2)."""
    return mpf(2) ** (-mp.prec // 2)


def to_real(x: Number) -> mpf:
    """Coerce ints, floats, strings, and Fractions to an mpmath real.

    Floats convert exactly (their binary value); Fractions convert as a
    correctly rounded quotient at the working precision.
    """
    if isinstance(x, mpf):
        return x
    if isinstance(x, Fraction):
        return mpf(x.numerator) / mpf(x.denominator)
    return mpf(x)


def real_to_str(x: Number) -> str:
    """Decimal string that round-trips within tau at the working precision."""
    from mpmath import nstr

    return nstr(to_real(x), mp.dps + 3)


def vec(xs: Iterable[Number]) -> tuple[mpf, ...]:
    return tuple(to_real(x) for x in xs)


def vec_to_strs(xs: Sequence[Number]) -> list[str]:
    return [real_to_str(x) for x in xs]


# Module init: honor the environment override once at import so library users
# get a consistent default; the CLI re-initializes from its config.
set_precision(configured_precision_bits())
