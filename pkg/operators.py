"""
Dense matrix realizations of the six fractional operators on a finite grid.

Functions are extended by zero outside the interior points a+1..b-1, which
turns every operator into a triangular Toeplitz matrix: left kinds are lower
triangular, right kinds upper triangular, and each right kind is exactly the
transpose of its left partner (the discrete integration by parts formulas).

The nabla right difference is built as that transpose rather than from the
closed form with kernel (s - rho(t)) summed over s = a+1..t, which does not
match the right sum it is derived from; the transpose form is the operator
for which the R-L by-parts identity holds.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

import config
from errors import DomainError, GridMismatchError, PairMismatchError, SizeLimitError
from frackernel import FracOrder, gl_kernel, rl_diff_kernel, rl_sum_kernel
from numeric import (
    Backend, as_array, exact_power, format_scalar, full, identity, max_abs, scalar, to_fraction, zero,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridSpec:
    """Integer endpoints a < b; interior points a+1..b-1; step h (G-L only)"""

    a: int
    b: int
    h: Fraction = Fraction(1)

    def __post_init__(self):
        for name in ('a', 'b'):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise DomainError(f"grid endpoint {name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        h = to_fraction(self.h)
        if h <= 0:
            raise DomainError(f"grid step h must be positive, got {h}")
        object.__setattr__(self, 'h', h)
        if self.b < self.a + 3:
            raise DomainError(f"grid needs b >= a + 3 (two interior points), got a={self.a}, b={self.b}")

    @classmethod
    def of_size(cls, n, a=0, h=1):
        return cls(a, a + n + 1, h)

    @property
    def n(self):
        return self.b - self.a - 1

    @property
    def points(self):
        return list(range(self.a + 1, self.b))

    def index_of(self, t):
        if not self.a < t < self.b:
            raise DomainError(f"t={t} is not an interior point of ({self.a}, {self.b})")
        return t - self.a - 1


@dataclass(frozen=True)
class GridFunction:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        if len(self.values) != self.grid.n:
            raise GridMismatchError(
                f"grid function has {len(self.values)} values, grid has {self.grid.n} interior points"
            )

    @classmethod
    def from_values(cls, grid, values, backend=Backend.EXACT):
        return cls(grid, as_array(list(values), Backend.parse(backend)))

    @classmethod
    def constant(cls, grid, value, backend=Backend.EXACT):
        return cls(grid, full(grid.n, value, Backend.parse(backend)))

    @property
    def backend(self):
        return Backend.EXACT if self.values.dtype == object else Backend.FLOAT

    def at(self, t):
        return self.values[self.grid.index_of(t)]

    def to_backend(self, backend):
        return GridFunction(self.grid, as_array(self.values, backend))

    def __len__(self):
        return len(self.values)


class OperatorKind(Enum):
    NABLA_LEFT_SUM = 'NablaLeftSum'
    NABLA_RIGHT_SUM = 'NablaRightSum'
    NABLA_LEFT_DIFF = 'NablaLeftDiff'
    NABLA_RIGHT_DIFF = 'NablaRightDiff'
    DELTA_LEFT_DIFF = 'DeltaLeftDiff'
    DELTA_RIGHT_DIFF = 'DeltaRightDiff'

    @property
    def is_left(self):
        return 'Left' in self.value

    @property
    def is_grunwald(self):
        return self.value.startswith('Delta')


# kind -> (kernel builder, adjoint partner)
_KIND_TABLE = {
    OperatorKind.NABLA_LEFT_SUM: (rl_sum_kernel, OperatorKind.NABLA_RIGHT_SUM),
    OperatorKind.NABLA_RIGHT_SUM: (rl_sum_kernel, OperatorKind.NABLA_LEFT_SUM),
    OperatorKind.NABLA_LEFT_DIFF: (rl_diff_kernel, OperatorKind.NABLA_RIGHT_DIFF),
    OperatorKind.NABLA_RIGHT_DIFF: (rl_diff_kernel, OperatorKind.NABLA_LEFT_DIFF),
    OperatorKind.DELTA_LEFT_DIFF: (gl_kernel, OperatorKind.DELTA_RIGHT_DIFF),
    OperatorKind.DELTA_RIGHT_DIFF: (gl_kernel, OperatorKind.DELTA_LEFT_DIFF),
}


def partner(kind):
    return _KIND_TABLE[OperatorKind(kind)][1]


@dataclass(frozen=True)
class OperatorMatrix:
    kind: OperatorKind
    mu: FracOrder
    grid: GridSpec
    entries: np.ndarray

    def __post_init__(self):
        self.entries.setflags(write=False)

    @property
    def backend(self):
        return self.mu.backend

    @property
    def n(self):
        return self.grid.n


def _gl_scale(mu, h):
    """h ** -mu in the backend of mu"""
    if h == 1:
        return scalar(1, mu.backend)
    if mu.backend is Backend.FLOAT:
        return float(h) ** -float(mu.mu)
    power = exact_power(h, -mu.mu)
    if power is None:
        raise DomainError(f"h^mu is irrational for h={h}, mu={mu}; use the float backend")
    return power


def toeplitz_lower(kernel_coeffs, n, backend):
    """Lower-triangular Toeplitz matrix with first column kernel_coeffs[:n]"""
    lags = np.subtract.outer(np.arange(n), np.arange(n))
    entries = full((n, n), 0, backend)
    below = lags >= 0
    entries[below] = np.asarray(kernel_coeffs)[lags[below]]
    return entries


def build_operator(kind, mu, grid):
    kind = OperatorKind(kind)
    n = grid.n
    if n > config.DENSE_LIMIT:
        raise SizeLimitError(f"interior size {n} exceeds the dense storage cap {config.DENSE_LIMIT}")

    builder, _ = _KIND_TABLE[kind]
    coeffs = builder(mu, n).coeffs
    entries = toeplitz_lower(coeffs, n, mu.backend)
    if kind.is_grunwald:
        entries = entries * _gl_scale(mu, grid.h)
    if not kind.is_left:
        entries = entries.T.copy()
    logger.debug(f"Built {kind.value} mu={mu} n={n} ({mu.backend.value})")
    return OperatorMatrix(kind, mu, grid, entries)


def apply(matrix, x):
    """Matrix-vector product (M x)(t) in the backend of the operator"""
    if matrix.grid != x.grid:
        raise GridMismatchError(f"operator grid {matrix.grid} does not match function grid {x.grid}")
    values = as_array(x.values, matrix.backend)
    return GridFunction(matrix.grid, matrix.entries @ values)


ADJOINT_PAIRS = {
    (OperatorKind.NABLA_LEFT_DIFF, OperatorKind.NABLA_RIGHT_DIFF),
    (OperatorKind.DELTA_LEFT_DIFF, OperatorKind.DELTA_RIGHT_DIFF),
    (OperatorKind.NABLA_LEFT_SUM, OperatorKind.NABLA_RIGHT_SUM),
}


def _check_pair(left, right):
    if (left.kind, right.kind) not in ADJOINT_PAIRS:
        raise PairMismatchError(f"{left.kind.value} and {right.kind.value} are not a by-parts pair")
    if left.grid != right.grid:
        raise GridMismatchError("by-parts pair built on different grids")
    if left.mu != right.mu:
        raise PairMismatchError(f"by-parts pair has different orders {left.mu} and {right.mu}")


def verify_by_parts(left, right, trials, seed, amplitude=3):
    """
    Max over random integer-valued (u, v) of
    |sum_s u(s) (left v)(s) - sum_s v(s) (right u)(s)|.

    Exactly zero in the exact backend.
    """
    _check_pair(left, right)
    if trials < 1:
        raise DomainError(f"trials must be positive, got {trials}")
    rng = np.random.default_rng(seed)
    backend = left.backend
    worst = zero(backend)
    for _ in range(trials):
        u_ints, v_ints = rng.integers(-amplitude, amplitude + 1, size=(2, left.n))
        u = GridFunction.from_values(left.grid, [int(value) for value in u_ints], backend)
        v = GridFunction.from_values(left.grid, [int(value) for value in v_ints], backend)
        lhs = np.dot(u.values, apply(left, v).values)
        rhs = np.dot(v.values, apply(right, u).values)
        worst = max(worst, abs(lhs - rhs))
    logger.debug(f"verify_by_parts {left.kind.value}/{right.kind.value} trials={trials} worst={worst}")
    return worst if backend is Backend.EXACT else float(worst)


def transpose_defect(left, right):
    """max |right - left^T|"""
    _check_pair(left, right)
    return max_abs(right.entries - left.entries.T)


def composition_defect(mu, grid):
    """max |NablaLeftDiff . NablaLeftSum - I|; zero under zero exterior support"""
    difference = build_operator(OperatorKind.NABLA_LEFT_DIFF, mu, grid)
    total = build_operator(OperatorKind.NABLA_LEFT_SUM, mu, grid)
    return max_abs(difference.entries @ total.entries - identity(grid.n, mu.backend))


def matrix_rows(matrix):
    """Row-major rows of rendered entries, first cell the grid point"""
    rows = []
    for t, row in zip(matrix.grid.points, matrix.entries):
        rows.append([str(t)] + [format_scalar(value) for value in row])
    return rows
