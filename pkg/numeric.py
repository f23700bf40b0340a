"""
Numeric backends: exact rationals (Fractions held in object arrays) and float64.

Every user-facing number goes through to_fraction first, so 0.3 means 3/10
regardless of the backend the computation later runs in.
"""

from enum import Enum
from fractions import Fraction

import numpy as np

from errors import DomainError


class Backend(Enum):
    EXACT = 'exact'
    FLOAT = 'float'

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {'exact': cls.EXACT, 'rational': cls.EXACT, 'exactrational': cls.EXACT,
                   'float': cls.FLOAT, 'float64': cls.FLOAT}
        try:
            return aliases[str(value).strip().lower()]
        except KeyError:
            raise DomainError(f"unknown backend {value!r} (expected 'exact' or 'float')") from None


def to_fraction(value):
    """Convert int, float, Fraction or a 'p/q' / decimal string to a Fraction"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise DomainError(f"not a number: {value!r}")
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, (float, np.floating)):
        if not np.isfinite(value):
            raise DomainError(f"not a finite number: {value!r}")
        # the shortest repr is what the user typed
        return Fraction(repr(float(value)))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise DomainError(f"cannot read {value!r} as a rational number") from None
    raise DomainError(f"not a number: {value!r}")


def scalar(value, backend):
    if backend is Backend.EXACT:
        return to_fraction(value)
    if isinstance(value, str):
        return float(to_fraction(value))
    return float(value)


def zero(backend):
    return Fraction(0) if backend is Backend.EXACT else 0.0


def one(backend):
    return Fraction(1) if backend is Backend.EXACT else 1.0


def as_array(values, backend):
    """1-D or 2-D array in the backend's representation"""
    if backend is Backend.EXACT:
        source = np.asarray(values, dtype=object)
        out = np.empty(source.shape, dtype=object)
        for index, value in np.ndenumerate(source):
            out[index] = to_fraction(value)
        return out
    if isinstance(values, np.ndarray) and values.dtype == object:
        return np.array([float(v) for v in values.ravel()], dtype=np.float64).reshape(values.shape)
    return np.asarray(values, dtype=np.float64)


def full(shape, value, backend):
    if backend is Backend.EXACT:
        out = np.empty(shape, dtype=object)
        out.fill(to_fraction(value))
        return out
    return np.full(shape, float(value), dtype=np.float64)


def identity(n, backend):
    out = full((n, n), 0, backend)
    out[np.diag_indices(n)] = one(backend)
    return out


def to_float(values):
    if isinstance(values, np.ndarray):
        if values.dtype == object:
            return as_array(values, Backend.FLOAT)
        return values.astype(np.float64, copy=False)
    return float(values)


def max_abs(values):
    """Largest magnitude entry; exact arrays stay exact"""
    flat = np.asarray(values).ravel()
    if flat.size == 0:
        return 0
    if flat.dtype == object:
        return max(abs(v) for v in flat)
    return float(np.max(np.abs(flat)))


def format_scalar(value):
    """'p/q' (or 'p') for rationals, shortest round-trip decimal for floats"""
    if isinstance(value, (Fraction, int, np.integer)) and not isinstance(value, bool):
        value = Fraction(int(value)) if not isinstance(value, Fraction) else value
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    return repr(float(value))


def _integer_root(value, n):
    """floor(value ** (1/n)) for a nonnegative int"""
    if value < 2:
        return value
    x = 1 << ((value.bit_length() + n - 1) // n)
    while True:
        y = ((n - 1) * x + value // x ** (n - 1)) // n
        if y >= x:
            return x
        x = y


def exact_power(base, exponent):
    """base ** exponent as a Fraction, or None when the result is irrational"""
    base = to_fraction(base)
    exponent = to_fraction(exponent)
    if base <= 0:
        raise DomainError(f"power base must be positive, got {base}")
    m, n = exponent.numerator, exponent.denominator
    num, den = base.numerator ** abs(m), base.denominator ** abs(m)
    num_root, den_root = _integer_root(num, n), _integer_root(den, n)
    if num_root ** n != num or den_root ** n != den:
        return None
    result = Fraction(num_root, den_root)
    return result if m >= 0 else 1 / result
