"""
Scalar special functions and the coefficient sequences behind every
fractional sum and difference operator.

All kernels come from multiplicative recurrences, so in the exact backend
they are computed without ever evaluating the gamma function at a
non-integer point.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np
from scipy.special import gammaln, gammasgn

from errors import DomainError
from numeric import Backend, as_array, scalar, to_fraction

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FracOrder:
    """Order mu in (0, 1] together with the backend computations run in"""

    mu: Fraction
    backend: Backend = Backend.EXACT

    def __post_init__(self):
        mu = to_fraction(self.mu)
        if not 0 < mu <= 1:
            raise DomainError(f"mu must lie in (0,1], got {mu}")
        object.__setattr__(self, 'mu', mu)
        object.__setattr__(self, 'backend', Backend.parse(self.backend))

    @classmethod
    def parse(cls, value, backend=Backend.EXACT):
        return cls(to_fraction(value), Backend.parse(backend))

    @property
    def value(self):
        """mu as a backend scalar"""
        return scalar(self.mu, self.backend)

    @property
    def is_classical(self):
        return self.mu == 1

    def complement(self):
        """The order 1 - mu of the sum inside the R-L difference"""
        return FracOrder(1 - self.mu, self.backend)

    def __str__(self):
        return f"{self.mu.numerator}/{self.mu.denominator}" if self.mu.denominator != 1 else str(self.mu.numerator)


class KernelKind(Enum):
    RL_SUM = 'RLSum'
    RL_DIFF = 'RLDiff'
    GL = 'GL'


@dataclass(frozen=True)
class KernelSeq:
    kind: KernelKind
    mu: FracOrder
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs.setflags(write=False)

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, index):
        return self.coeffs[index]

    def tolist(self):
        return list(self.coeffs)


def _check_length(length):
    if isinstance(length, bool) or not isinstance(length, (int, np.integer)) or length < 1:
        raise DomainError(f"kernel length must be a positive integer, got {length!r}")
    return int(length)


def _is_integral(value):
    return float(value).is_integer()


def _is_pole(value):
    return _is_integral(value) and float(value) <= 0


def log_gamma(x):
    """Natural log of Gamma(x) for x > 0 (float backend only)"""
    x = float(scalar(x, Backend.FLOAT))
    if not x > 0:
        raise DomainError(f"log_gamma needs a positive argument, got {x}")
    return float(gammaln(x))


def _gamma_ratio(numerator_arg, denominator_arg):
    """Gamma(numerator_arg) / Gamma(denominator_arg) in floats, poles rejected"""
    for arg in (numerator_arg, denominator_arg):
        if _is_pole(arg):
            raise DomainError(f"gamma function has a pole at {arg}")
    if numerator_arg == denominator_arg:
        return 1.0
    sign = gammasgn(numerator_arg) * gammasgn(denominator_arg)
    return float(sign * math.exp(gammaln(numerator_arg) - gammaln(denominator_arg)))


def _require_integer(name, value, minimum):
    value = to_fraction(value)
    if value.denominator != 1 or value < minimum:
        raise DomainError(f"exact backend needs integer {name} >= {minimum}, got {value}")
    return value.numerator


def falling_factorial(t, alpha, backend=Backend.FLOAT):
    """t^(alpha) = Gamma(t+1) / Gamma(t-alpha+1)"""
    backend = Backend.parse(backend)
    if backend is Backend.EXACT:
        t_int = _require_integer('t', t, 0)
        alpha_int = _require_integer('alpha', alpha, 0)
        if alpha_int > t_int:
            raise DomainError(f"exact falling factorial needs t >= alpha, got t={t_int}, alpha={alpha_int}")
        return Fraction(math.prod(range(t_int - alpha_int + 1, t_int + 1)))

    t, alpha = float(scalar(t, backend)), float(scalar(alpha, backend))
    if _is_integral(t) and _is_integral(alpha) and t >= alpha >= 0:
        return float(math.prod(range(int(t - alpha) + 1, int(t) + 1)))
    return _gamma_ratio(t + 1, t - alpha + 1)


def rising_factorial(t, alpha, backend=Backend.FLOAT):
    """t^(alpha, rising) = Gamma(t+alpha) / Gamma(t)"""
    backend = Backend.parse(backend)
    if backend is Backend.EXACT:
        t_int = _require_integer('t', t, 1)
        alpha_int = _require_integer('alpha', alpha, 0)
        return Fraction(math.prod(range(t_int, t_int + alpha_int)))

    t, alpha = float(scalar(t, backend)), float(scalar(alpha, backend))
    if _is_integral(t) and _is_integral(alpha) and t >= 1 and alpha >= 0:
        return float(math.prod(range(int(t), int(t + alpha))))
    return _gamma_ratio(t + alpha, t)


def _recurrence(first_factor, length, backend):
    """Sequence c0 = 1, c_{j+1} = c_j * factor(j)"""
    if backend is Backend.EXACT:
        coeffs = [Fraction(1)]
        for j in range(length - 1):
            coeffs.append(coeffs[-1] * first_factor(Fraction(j)))
        return as_array(coeffs, backend)
    j = np.arange(length - 1, dtype=np.float64)
    return np.concatenate(([1.0], np.cumprod(first_factor(j))))


def rl_sum_kernel(mu, length):
    """Weights Gamma(j+mu) / (Gamma(mu) j!) of the nabla left fractional sum at lag j"""
    length = _check_length(length)
    nu = mu.value
    coeffs = _recurrence(lambda j: (j + nu) / (j + 1), length, mu.backend)
    logger.debug(f"rl_sum_kernel mu={mu} len={length}")
    return KernelSeq(KernelKind.RL_SUM, mu, coeffs)


def gl_kernel(mu, length):
    """Grunwald-Letnikov weights (-1)^s binom(mu, s)"""
    length = _check_length(length)
    nu = mu.value
    coeffs = _recurrence(lambda s: (s - nu) / (s + 1), length, mu.backend)
    logger.debug(f"gl_kernel mu={mu} len={length}")
    return KernelSeq(KernelKind.GL, mu, coeffs)


def rl_diff_kernel(mu, length):
    """Backward difference of the order 1-mu sum kernel (one row of the nabla left difference)"""
    length = _check_length(length)
    if mu.is_classical:
        coeffs = as_array([1, -1] + [0] * (length - 2), mu.backend)[:length]
        return KernelSeq(KernelKind.RL_DIFF, mu, coeffs)

    sums = rl_sum_kernel(mu.complement(), length).coeffs
    if mu.backend is Backend.EXACT:
        coeffs = as_array([sums[0]] + list(np.diff(sums)), mu.backend)
    else:
        # c_j - c_{j-1} == -mu * c_{j-1} / j; avoids cancellation
        j = np.arange(1, length, dtype=np.float64)
        coeffs = np.concatenate(([1.0], -mu.value * sums[:-1] / j))
    logger.debug(f"rl_diff_kernel mu={mu} len={length}")
    return KernelSeq(KernelKind.RL_DIFF, mu, coeffs)


KERNELS = {
    KernelKind.RL_SUM: rl_sum_kernel,
    KernelKind.RL_DIFF: rl_diff_kernel,
    KernelKind.GL: gl_kernel,
}


def kernel(kind, mu, length):
    return KERNELS[KernelKind(kind)](mu, length)
