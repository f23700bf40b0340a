"""
Discrete fractional Sturm-Liouville operators.

    L = M_left . diag(p) . M_right + diag(q)

with (M_left, M_right) the nabla left/right R-L differences (variant RL) or
the delta left/right G-L differences (variant GL). Because M_right is the
transpose of M_left, L is symmetric and L - diag(q) is positive
semidefinite whenever p > 0.

The weighted eigenproblem L u = lambda diag(r) u is reduced by the symmetric
congruence diag(r)^(-1/2) L diag(r)^(-1/2) and diagonalized with cyclic
Jacobi rotations, so eigenvalues are real and eigenvectors r-orthonormal by
construction.
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

import config
from errors import ConvergenceError, DomainError, GridMismatchError
from frackernel import FracOrder
from numeric import Backend, as_array, max_abs, to_float
from operators import GridFunction, GridSpec, OperatorKind, OperatorMatrix, build_operator

logger = logging.getLogger(__name__)


class Variant(Enum):
    RL = 'RL'
    GL = 'GL'

    @classmethod
    def parse(cls, value):
        try:
            return cls(str(value.value if isinstance(value, cls) else value).upper())
        except ValueError:
            raise DomainError(f"unknown variant {value!r} (expected 'RL' or 'GL')") from None


VARIANT_KINDS = {
    Variant.RL: (OperatorKind.NABLA_LEFT_DIFF, OperatorKind.NABLA_RIGHT_DIFF),
    Variant.GL: (OperatorKind.DELTA_LEFT_DIFF, OperatorKind.DELTA_RIGHT_DIFF),
}


@dataclass(frozen=True)
class DfslOperator:
    variant: Variant
    grid: GridSpec
    mu: FracOrder
    p: GridFunction
    q: GridFunction
    left: OperatorMatrix
    right: OperatorMatrix
    stiffness: np.ndarray  # M_left diag(p) M_right
    matrix: np.ndarray     # stiffness + diag(q)

    @property
    def backend(self):
        return self.mu.backend

    @property
    def n(self):
        return self.grid.n

    @property
    def symmetry_defect(self):
        return max_abs(self.matrix - self.matrix.T)


def _require_grid(grid, *functions):
    for function in functions:
        if function.grid != grid:
            raise GridMismatchError(f"grid function on {function.grid} used with grid {grid}")


def _require_positive(name, values):
    if not all(value > 0 for value in values):
        raise DomainError(f"{name} must be positive at every interior point")


def assemble(variant, grid, mu, p, q=None):
    variant = Variant.parse(variant)
    backend = mu.backend
    if q is None:
        q = GridFunction.constant(grid, 0, backend)
    _require_grid(grid, p, q)
    p = p.to_backend(backend)
    q = q.to_backend(backend)
    _require_positive('p', p.values)

    left_kind, right_kind = VARIANT_KINDS[variant]
    left = build_operator(left_kind, mu, grid)
    right = build_operator(right_kind, mu, grid)

    stiffness = (left.entries * p.values[np.newaxis, :]) @ right.entries
    matrix = stiffness.copy()
    matrix[np.diag_indices(grid.n)] += q.values
    logger.debug(f"Assembled {variant.value} operator mu={mu} n={grid.n} ({backend.value})")
    return DfslOperator(variant, grid, mu, p, q, left, right, stiffness, matrix)


def lagrange_sum(op, u, v, window=None):
    """
    sum_s [v(s) (L0 u)(s) - u(s) (L0 v)(s)] with L0 = L - diag(q).

    window=(t1, t2) restricts the outer sum to grid points t1..t2 inclusive;
    only the full-range sum is guaranteed to vanish.
    """
    _require_grid(op.grid, u, v)
    u_values = as_array(u.values, op.backend)
    v_values = as_array(v.values, op.backend)
    terms = v_values * (op.stiffness @ u_values) - u_values * (op.stiffness @ v_values)
    if window is not None:
        t1, t2 = window
        terms = terms[op.grid.index_of(t1):op.grid.index_of(t2) + 1]
    total = terms.sum()
    return total if op.backend is Backend.EXACT else float(total)


def _max_off_diagonal(a):
    return float(np.max(np.abs(a - np.diag(np.diag(a))))) if len(a) > 1 else 0.0


def jacobi_eigh(matrix, tol, max_sweeps):
    """
    Cyclic Jacobi rotations on a symmetric float matrix.

    Returns (eigenvalues, eigenvectors, sweeps) with eigenvectors as columns,
    unsorted. Stops once every off-diagonal magnitude is <= tol * ||A||_F.
    """
    a = np.array(matrix, dtype=np.float64)
    n = a.shape[0]
    vectors = np.eye(n)
    threshold = tol * np.linalg.norm(a)

    for sweep in range(max_sweeps + 1):
        off = _max_off_diagonal(a)
        if off <= threshold:
            return np.diag(a).copy(), vectors, sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= threshold:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                elif abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0

                vec_p, vec_q = vectors[:, p].copy(), vectors[:, q].copy()
                vectors[:, p] = c * vec_p - s * vec_q
                vectors[:, q] = s * vec_p + c * vec_q

    raise ConvergenceError(
        f"Jacobi rotations did not converge in {max_sweeps} sweeps (off-diagonal {off:.3e})",
        sweeps=max_sweeps,
        off_norm=off,
    )


@dataclass(frozen=True)
class EigenSystem:
    grid: GridSpec
    eigenvalues: np.ndarray   # ascending
    eigenvectors: np.ndarray  # column k pairs with eigenvalues[k]
    residuals: np.ndarray
    weights: np.ndarray
    sweeps: int

    def __len__(self):
        return len(self.eigenvalues)

    def pair(self, k):
        """1-based eigenpair (lambda_k, u_k)"""
        if not 1 <= k <= len(self):
            raise DomainError(f"eigenpair index {k} outside 1..{len(self)}")
        return float(self.eigenvalues[k - 1]), GridFunction(self.grid, self.eigenvectors[:, k - 1].copy())

    def weighted_gram_defect(self):
        gram = self.eigenvectors.T @ (self.weights[:, np.newaxis] * self.eigenvectors)
        return float(np.max(np.abs(gram - np.eye(len(self)))))


def _residual_norm(matrix, weights, lam, u):
    return float(np.linalg.norm(matrix @ u - lam * weights * u))


def eigensolve(op, r, tol=None, max_sweeps=None):
    tol = config.SOLVER_CONFIG['tol'] if tol is None else float(tol)
    max_sweeps = config.SOLVER_CONFIG['max_sweeps'] if max_sweeps is None else int(max_sweeps)
    if tol < 1e-14:
        raise DomainError(f"eigensolver tolerance must be >= 1e-14, got {tol}")
    _require_grid(op.grid, r)
    weights = to_float(r.values)
    _require_positive('r', weights)

    matrix = to_float(op.matrix)
    root = np.sqrt(weights)
    congruent = matrix / np.outer(root, root)
    congruent = 0.5 * (congruent + congruent.T)

    values, vectors, sweeps = jacobi_eigh(congruent, tol, max_sweeps)
    order = np.argsort(values, kind='stable')
    values = values[order]
    vectors = vectors[:, order] / root[:, np.newaxis]

    for k in range(vectors.shape[1]):
        column = vectors[:, k]
        if column[np.argmax(np.abs(column))] < 0:
            vectors[:, k] = -column

    residuals = np.array([
        _residual_norm(matrix, weights, values[k], vectors[:, k]) for k in range(len(values))
    ])
    logger.debug(f"eigensolve {op.variant.value} n={op.n}: {sweeps} sweeps, max residual {residuals.max():.2e}")
    return EigenSystem(op.grid, values, vectors, residuals, weights, sweeps)


def residual(op, r, lam, u):
    """||L u - lambda diag(r) u||_2"""
    _require_grid(op.grid, r, u)
    return _residual_norm(to_float(op.matrix), to_float(r.values), float(lam), to_float(u.values))
