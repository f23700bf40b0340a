"""
Generalized zeros of grid functions and the Sturm comparison predicates.

A generalized zero (node) is either an ExactZero at t (|u(t)| <= tol * ||u||_inf)
or a SignChange across (t-1, t). A SignChange sits at t - 1/2 under the
midpoint placement or at the zero of the linear interpolant under the
interpolated placement.

Solutions of the two comparison equations are eigenvectors of the assembled
operators: an eigenpair (lambda, u) of L(q) solves
    L0 u + (q - lambda r) u = 0,
so the effective potentials are k = q1 - lambda1 r and m = q2 - lambda2 r.

The assembled operator is positive (its mu = 1 limit is -(p u')'), so under
k < m the k-equation solution u is the more oscillatory one. The default
'oscillation' orientation therefore evaluates both predicates with v in the
reference role; 'as_stated' applies them to (Z_u, Z_v) literally. Both
readings are kept in every report.
"""

import bisect
import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from itertools import pairwise

import numpy as np

import config
from dfsl import Variant, assemble, eigensolve
from errors import DomainError, HypothesisUnmet, TrivialSolutionError
from frackernel import FracOrder
from numeric import Backend, format_scalar, max_abs, to_float
from operators import GridFunction, GridSpec

logger = logging.getLogger(__name__)

VERSION = '1.0.0'


class NodeKind(Enum):
    EXACT_ZERO = 'ExactZero'
    SIGN_CHANGE = 'SignChange'


class Placement(Enum):
    MIDPOINT = 'midpoint'
    INTERPOLATED = 'interpolated'


class Orientation(Enum):
    OSCILLATION = 'oscillation'
    AS_STATED = 'as_stated'


@dataclass(frozen=True)
class Node:
    kind: NodeKind
    left: int
    right: int
    position: float

    @classmethod
    def exact_zero(cls, t):
        return cls(NodeKind.EXACT_ZERO, t, t, float(t))

    @classmethod
    def sign_change(cls, t, position=None):
        """Sign change across (t-1, t)"""
        return cls(NodeKind.SIGN_CHANGE, t - 1, t, t - 0.5 if position is None else float(position))

    def to_dict(self):
        points = [self.left] if self.kind is NodeKind.EXACT_ZERO else [self.left, self.right]
        return {'kind': self.kind.value, 'points': points, 'position': self.position}


@dataclass(frozen=True)
class NodeSet:
    nodes: tuple = ()
    tolerance: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'nodes', tuple(self.nodes))
        for first, second in pairwise(self.nodes):
            if not first.position < second.position:
                raise DomainError(f"nodes must be strictly ordered, got {first.position} then {second.position}")

    @classmethod
    def from_positions(cls, positions, tolerance=0.0):
        """Integer positions become ExactZero nodes, others SignChange nodes"""
        nodes = []
        for position in positions:
            if float(position).is_integer():
                nodes.append(Node.exact_zero(int(position)))
            else:
                nodes.append(Node.sign_change(int(np.floor(position)) + 1, position))
        return cls(tuple(nodes), tolerance)

    @property
    def positions(self):
        return [node.position for node in self.nodes]

    def __len__(self):
        return len(self.nodes)

    def __iter__(self):
        return iter(self.nodes)


def find_generalized_zeros(u, tol=None, placement=Placement.MIDPOINT):
    tol = config.ZERO_TOL if tol is None else tol
    if tol < 0:
        raise DomainError(f"zero tolerance must be nonnegative, got {tol}")
    placement = Placement(placement)
    values = list(u.values)
    threshold = tol * max_abs(u.values)
    is_zero = [abs(value) <= threshold for value in values]
    if all(is_zero):
        raise TrivialSolutionError('grid function is identically zero; the comparison theorems concern nontrivial solutions')

    nodes = []
    for i, t in enumerate(u.grid.points):
        if is_zero[i]:
            nodes.append(Node.exact_zero(t))
        elif i > 0 and not is_zero[i - 1] and values[i - 1] * values[i] < 0:
            if placement is Placement.MIDPOINT:
                nodes.append(Node.sign_change(t))
            else:
                before, after = values[i - 1], values[i]
                nodes.append(Node.sign_change(t, (t - 1) + float(before / (before - after))))
    return NodeSet(tuple(nodes), float(tol))


class Status(Enum):
    HOLDS = 'Holds'
    VACUOUSLY_HOLDS = 'VacuouslyHolds'
    VIOLATED = 'Violated'


@dataclass(frozen=True)
class Verdict:
    status: Status
    witness: dict = None
    detail: str = ''

    @property
    def holds(self):
        return self.status is not Status.VIOLATED

    def to_dict(self):
        return {'status': self.status.value, 'witness': self.witness, 'detail': self.detail}


def check_first_comparison(z_u, z_v):
    """Between consecutive nodes of z_u there is a node of z_v"""
    if len(z_u) < 2:
        return Verdict(Status.VACUOUSLY_HOLDS, detail='fewer than two reference zeros')
    others = z_v.positions
    for x1, x2 in pairwise(z_u.positions):
        index = bisect.bisect_right(others, x1)
        if index == len(others) or not others[index] < x2:
            return Verdict(Status.VIOLATED, {'pair': [x1, x2]}, f"no zero strictly between {x1} and {x2}")
    return Verdict(Status.HOLDS)


def kth_order_flags(z_u, z_v):
    return [xv < xu for xu, xv in zip(z_u.positions, z_v.positions)]


def check_second_comparison(z_u, z_v):
    """z_v has at least as many nodes as z_u and its k-th node comes strictly first"""
    if len(z_v) < len(z_u):
        return Verdict(
            Status.VIOLATED,
            {'count_u': len(z_u), 'count_v': len(z_v)},
            f"count deficit: {len(z_v)} < {len(z_u)}",
        )
    for k, (xu, xv) in enumerate(zip(z_u.positions, z_v.positions), start=1):
        if not xv < xu:
            return Verdict(Status.VIOLATED, {'k': k, 'u': xu, 'v': xv}, f"zero {k} not strictly earlier")
    return Verdict(Status.HOLDS)


def _values(function):
    return [format_scalar(value) for value in function.values]


@dataclass(frozen=True)
class ComparisonProblem:
    variant: Variant
    grid: GridSpec
    mu: FracOrder
    p: GridFunction
    q1: GridFunction
    q2: GridFunction
    r: GridFunction
    k1: int
    k2: int
    zero_tol: float = field(default_factory=lambda: config.ZERO_TOL)
    placement: Placement = Placement.INTERPOLATED
    orientation: Orientation = Orientation.OSCILLATION
    margin: float = field(default_factory=lambda: config.HYPOTHESIS_MARGIN)
    seed: int = 0
    eig_tol: float = None

    def to_dict(self):
        return {
            'variant': self.variant.value,
            'grid': {'a': self.grid.a, 'b': self.grid.b, 'h': format_scalar(self.grid.h)},
            'mu': str(self.mu),
            'backend': self.mu.backend.value,
            'p': _values(self.p),
            'q1': _values(self.q1),
            'q2': _values(self.q2),
            'r': _values(self.r),
            'selection': {'k1': self.k1, 'k2': self.k2},
            'zero_tol': self.zero_tol,
            'placement': self.placement.value,
            'orientation': self.orientation.value,
            'margin': self.margin,
            'seed': self.seed,
        }

    def digest(self):
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


@dataclass(frozen=True)
class ComparisonPair:
    u: GridFunction
    v: GridFunction
    k: np.ndarray
    m: np.ndarray
    lambda1: float
    lambda2: float
    residual1: float
    residual2: float


def build_comparison_pair(problem):
    op1 = assemble(problem.variant, problem.grid, problem.mu, problem.p, problem.q1)
    op2 = assemble(problem.variant, problem.grid, problem.mu, problem.p, problem.q2)
    system1 = eigensolve(op1, problem.r, problem.eig_tol)
    system2 = eigensolve(op2, problem.r, problem.eig_tol)
    lambda1, u = system1.pair(problem.k1)
    lambda2, v = system2.pair(problem.k2)

    weights = to_float(problem.r.values)
    k = to_float(problem.q1.values) - lambda1 * weights
    m = to_float(problem.q2.values) - lambda2 * weights
    gap = m - k
    worst = int(np.argmin(gap))
    if not gap[worst] > problem.margin:
        raise HypothesisUnmet(problem.grid.points[worst], float(k[worst]), float(m[worst]))

    return ComparisonPair(
        u, v, k, m, lambda1, lambda2,
        float(system1.residuals[problem.k1 - 1]), float(system2.residuals[problem.k2 - 1]),
    )


def _oriented(orientation, z_u, z_v):
    """(reference, other) node sets for the given orientation"""
    if orientation is Orientation.OSCILLATION:
        return z_v, z_u
    return z_u, z_v


@dataclass(frozen=True)
class ComparisonReport:
    problem: ComparisonProblem
    pair: ComparisonPair
    zeros_u: NodeSet
    zeros_v: NodeSet
    verdicts: dict
    runtime: float = field(default=0.0, compare=False)

    @property
    def verdict_first(self):
        return self.verdicts[self.problem.orientation]['first']

    @property
    def verdict_second(self):
        return self.verdicts[self.problem.orientation]['second']

    @property
    def kth_order(self):
        return kth_order_flags(*_oriented(self.problem.orientation, self.zeros_u, self.zeros_v))

    def to_dict(self):
        return {
            'problem': self.problem.to_dict(),
            'digest': self.problem.digest(),
            'zeros_u': self.zeros_u.positions,
            'zeros_v': self.zeros_v.positions,
            'nodes_u': [node.to_dict() for node in self.zeros_u],
            'nodes_v': [node.to_dict() for node in self.zeros_v],
            'counts': {'n_u': len(self.zeros_u), 'n_v': len(self.zeros_v)},
            'kth_order': self.kth_order,
            'effective_k': [float(value) for value in self.pair.k],
            'effective_m': [float(value) for value in self.pair.m],
            'hypothesis': {'min_margin': float(np.min(self.pair.m - self.pair.k))},
            'verdict_first': self.verdict_first.to_dict(),
            'verdict_second': self.verdict_second.to_dict(),
            'verdicts': {
                orientation.value: {name: verdict.to_dict() for name, verdict in pair.items()}
                for orientation, pair in self.verdicts.items()
            },
            'eigen': {
                'lambda1': self.pair.lambda1,
                'lambda2': self.pair.lambda2,
                'residuals': [self.pair.residual1, self.pair.residual2],
            },
            'meta': {
                'backend': self.problem.mu.backend.value,
                'seed': self.problem.seed,
                'version': VERSION,
            },
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + '\n'


def run_comparison(problem, tol=None):
    started = time.perf_counter()
    zero_tol = problem.zero_tol if tol is None else tol
    pair = build_comparison_pair(problem)
    zeros_u = find_generalized_zeros(pair.u, zero_tol, problem.placement)
    zeros_v = find_generalized_zeros(pair.v, zero_tol, problem.placement)

    verdicts = {}
    for orientation in Orientation:
        reference, other = _oriented(orientation, zeros_u, zeros_v)
        verdicts[orientation] = {
            'first': check_first_comparison(reference, other),
            'second': check_second_comparison(reference, other),
        }

    runtime = time.perf_counter() - started
    report = ComparisonReport(problem, pair, zeros_u, zeros_v, verdicts, runtime)
    logger.info(
        f"Comparison {problem.variant.value} mu={problem.mu} k1={problem.k1} k2={problem.k2}: "
        f"first={report.verdict_first.status.value}, second={report.verdict_second.status.value} "
        f"({runtime:.3f}s)"
    )
    return report


def classical_suite(count, seed, n=9, spread=0.5):
    """
    Seeded random mu = 1 GL problems (p = r = 1) whose eigenpair selections
    satisfy k < m pointwise. Candidates that miss the hypothesis are skipped.
    """
    rng = np.random.default_rng(seed)
    grid = GridSpec.of_size(n)
    mu = FracOrder(1, Backend.FLOAT)
    ones = GridFunction.constant(grid, 1, Backend.FLOAT)
    problems = []
    attempts = 0
    while len(problems) < count:
        attempts += 1
        if attempts > 50 * count:
            raise DomainError(f"could not find {count} hypothesis-satisfying problems in {attempts} attempts")
        q1 = rng.uniform(-1.0, 1.0, n)
        q2 = q1 + rng.uniform(0.0, spread, n)
        k2 = int(rng.integers(1, n))
        k1 = int(rng.integers(k2 + 1, n + 1))
        problem = ComparisonProblem(
            Variant.GL, grid, mu, ones,
            GridFunction(grid, q1), GridFunction(grid, q2), ones,
            k1, k2, seed=seed,
        )
        try:
            build_comparison_pair(problem)
        except HypothesisUnmet:
            continue
        problems.append(problem)
    logger.debug(f"classical_suite: {count} problems from {attempts} candidates")
    return problems
