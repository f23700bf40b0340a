"""
Command-line front end.

    dfsl <command> --config <path> [--strict] [--out <dir>]

Commands: kernels, opmat, verify, eig, compare, sweep. Experiment documents
are TOML; see README.md for the full grammar and configs/ for examples.

Exit status: 0 on success, 1 when --strict is set and a hypothesis is unmet
or a verdict/identity is violated (and on runtime domain failures), 2 on
input errors.
"""

import argparse
import json
import logging
import os
import re
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import pandas as pd

import config
from comparison import (
    ComparisonProblem, Orientation, Placement, run_comparison,
)
from dfsl import Variant, assemble, eigensolve
from errors import ConfigError, DfslError, DomainError, HypothesisUnmet
from frackernel import FracOrder, KernelKind, kernel
from numeric import Backend, exact_power, format_scalar, to_fraction
from operators import (
    GridFunction, GridSpec, OperatorKind, build_operator, composition_defect, matrix_rows,
    partner, transpose_defect, verify_by_parts,
)

logger = logging.getLogger(__name__)

COMMANDS = ('kernels', 'opmat', 'verify', 'eig', 'compare', 'sweep')

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2

FLOAT_IDENTITY_TOL = 1e-10


@dataclass(frozen=True)
class Constant:
    value: Fraction

    def expand(self, grid, backend):
        return GridFunction.constant(grid, self.value, backend)


@dataclass(frozen=True)
class Values:
    values: tuple

    def expand(self, grid, backend):
        return GridFunction.from_values(grid, self.values, backend)


@dataclass(frozen=True)
class RunConfig:
    command: str
    mu: tuple
    backend: Backend = Backend.EXACT
    variant: Variant = Variant.GL
    grid: GridSpec = None
    length: int = 8
    kinds: tuple = (KernelKind.GL,)
    operator_kind: OperatorKind = OperatorKind.NABLA_LEFT_DIFF
    trials: int = 20
    coefficients: dict = field(default_factory=dict)
    k1: int = 1
    k2: int = 1
    tol: float = field(default_factory=lambda: config.SOLVER_CONFIG['tol'])
    zero_tol: float = field(default_factory=lambda: config.ZERO_TOL)
    margin: float = field(default_factory=lambda: config.HYPOTHESIS_MARGIN)
    placement: Placement = Placement.INTERPOLATED
    orientation: Orientation = Orientation.OSCILLATION
    seed: int = 0
    vectors: bool = False
    strict: bool = False
    out_dir: str = None

    @property
    def order(self):
        return FracOrder(self.mu[0], self.backend)

    @property
    def orders(self):
        return [FracOrder(mu, self.backend) for mu in self.mu]

    def coefficient(self, name):
        coefficient = self.coefficients.get(name, COEFFICIENT_DEFAULTS[name])
        return coefficient.expand(self.grid, self.backend)

    def problem(self, mu):
        return ComparisonProblem(
            self.variant, self.grid, mu,
            self.coefficient('p'), self.coefficient('q1'), self.coefficient('q2'), self.coefficient('r'),
            self.k1, self.k2,
            zero_tol=self.zero_tol, placement=self.placement, orientation=self.orientation,
            margin=self.margin, seed=self.seed, eig_tol=self.tol,
        )


COEFFICIENT_DEFAULTS = {
    'p': Constant(Fraction(1)),
    'q': Constant(Fraction(0)),
    'q1': Constant(Fraction(0)),
    'q2': Constant(Fraction(0)),
    'r': Constant(Fraction(1)),
}
POSITIVE_COEFFICIENTS = ('p', 'r')

_TOP_LEVEL = {'command', 'backend', 'variant', 'mu', 'tol', 'seed', 'strict',
              'grid', 'kernels', 'operator', 'verify', 'coefficients', 'selection',
              'comparison', 'eig', 'output'}
_SECTIONS = {
    'grid': {'a', 'b', 'h'},
    'kernels': {'len', 'kinds'},
    'operator': {'kind'},
    'verify': {'trials'},
    'coefficients': set(COEFFICIENT_DEFAULTS),
    'selection': {'k1', 'k2'},
    'comparison': {'placement', 'orientation', 'zero_tol', 'margin'},
    'eig': {'vectors'},
    'output': {'dir'},
}


def _location(error):
    line = getattr(error, 'lineno', None)
    column = getattr(error, 'colno', None)
    if line is None:
        match = re.search(r'line (\d+), column (\d+)', str(error))
        if match:
            line, column = int(match.group(1)), int(match.group(2))
    return line, column


def _enum(enum_cls, value, key):
    for member in enum_cls:
        if str(value).lower() in (member.value.lower(), member.name.lower()):
            return member
    choices = ', '.join(member.value for member in enum_cls)
    raise ConfigError(f"unknown value {value!r} (expected one of {choices})", key=key)


def _integer(value, key, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"expected an integer, got {value!r}", key=key)
    if minimum is not None and value < minimum:
        raise ConfigError(f"must be >= {minimum}, got {value}", key=key)
    return value


def _positive_float(value, key, allow_zero=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", key=key)
    if value < 0 or (value == 0 and not allow_zero):
        raise ConfigError(f"must be {'nonnegative' if allow_zero else 'positive'}, got {value}", key=key)
    return float(value)


def _rational(value, key):
    if isinstance(value, bool):
        raise ConfigError(f"expected a number, got {value!r}", key=key)
    try:
        return to_fraction(value)
    except DomainError as e:
        raise ConfigError(str(e), key=key) from None


def _order(value, key):
    mu = _rational(value, key)
    if not 0 < mu <= 1:
        raise ConfigError('mu must lie in (0,1]', key=key)
    return mu


def _check_keys(table, allowed, prefix):
    for key in table:
        if key not in allowed:
            raise ConfigError('unknown key', key=f"{prefix}{key}")


def _section(data, name):
    table = data.get(name, {})
    if not isinstance(table, dict):
        raise ConfigError('expected a table', key=name)
    _check_keys(table, _SECTIONS[name], f"{name}.")
    return table


def _coefficient(value, key, grid, positive):
    if isinstance(value, list):
        values = tuple(_rational(item, f"{key}[{i}]") for i, item in enumerate(value))
        if grid is not None and len(values) != grid.n:
            raise ConfigError(f"expected {grid.n} values for the grid, got {len(values)}", key=key)
        if positive and not all(item > 0 for item in values):
            raise ConfigError('values must be positive', key=key)
        return Values(values)
    constant = _rational(value, key)
    if positive and constant <= 0:
        raise ConfigError('value must be positive', key=key)
    return Constant(constant)


def parse_config(text, command=None):
    """Parse and validate a TOML experiment document into a RunConfig"""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        line, column = _location(e)
        raise ConfigError(f"parse error: {e}", line=line, column=column) from None
    _check_keys(data, _TOP_LEVEL, '')

    declared = data.get('command')
    if declared is not None and command is not None and declared != command:
        raise ConfigError(f"config declares {declared!r} but {command!r} was requested", key='command')
    command = declared or command
    if command not in COMMANDS:
        raise ConfigError(f"expected one of {', '.join(COMMANDS)}, got {command!r}", key='command')

    settings = {'command': command}
    if 'backend' in data:
        settings['backend'] = _enum(Backend, data['backend'], 'backend')
    if 'variant' in data:
        settings['variant'] = _enum(Variant, data['variant'], 'variant')

    if 'mu' not in data:
        raise ConfigError('required', key='mu')
    raw_mu = data['mu']
    if command == 'sweep':
        raw_list = raw_mu if isinstance(raw_mu, list) else [raw_mu]
        orders = tuple(_order(value, f"mu[{i}]") for i, value in enumerate(raw_list))
        if not orders:
            raise ConfigError('sweep needs at least one order', key='mu')
        if any(second <= first for first, second in zip(orders, orders[1:])):
            raise ConfigError('sweep orders must be strictly increasing', key='mu')
        settings['mu'] = orders
    else:
        if isinstance(raw_mu, list):
            raise ConfigError(f"a single order is expected for {command}", key='mu')
        settings['mu'] = (_order(raw_mu, 'mu'),)

    if 'tol' in data:
        settings['tol'] = _positive_float(data['tol'], 'tol')
        if settings['tol'] < 1e-14:
            raise ConfigError('must be >= 1e-14', key='tol')
    if 'seed' in data:
        settings['seed'] = _integer(data['seed'], 'seed')
    if 'strict' in data:
        if not isinstance(data['strict'], bool):
            raise ConfigError('expected true or false', key='strict')
        settings['strict'] = data['strict']

    grid_table = _section(data, 'grid')
    grid = None
    if grid_table:
        for key in ('a', 'b'):
            if key not in grid_table:
                raise ConfigError('required', key=f"grid.{key}")
        a = _integer(grid_table['a'], 'grid.a')
        b = _integer(grid_table['b'], 'grid.b')
        h = _rational(grid_table.get('h', 1), 'grid.h')
        if h <= 0:
            raise ConfigError('must be positive', key='grid.h')
        if b < a + 3:
            raise ConfigError('need b >= a + 3 (at least two interior points)', key='grid.b')
        grid = GridSpec(a, b, h)
    elif command != 'kernels':
        raise ConfigError(f"required for {command}", key='grid')
    settings['grid'] = grid

    kernels_table = _section(data, 'kernels')
    if 'len' in kernels_table:
        settings['length'] = _integer(kernels_table['len'], 'kernels.len', minimum=1)
    if 'kinds' in kernels_table:
        raw_kinds = kernels_table['kinds']
        raw_kinds = raw_kinds if isinstance(raw_kinds, list) else [raw_kinds]
        settings['kinds'] = tuple(_enum(KernelKind, kind, f"kernels.kinds[{i}]") for i, kind in enumerate(raw_kinds))

    operator_table = _section(data, 'operator')
    if 'kind' in operator_table:
        settings['operator_kind'] = _enum(OperatorKind, operator_table['kind'], 'operator.kind')

    verify_table = _section(data, 'verify')
    if 'trials' in verify_table:
        settings['trials'] = _integer(verify_table['trials'], 'verify.trials', minimum=1)

    coefficients_table = _section(data, 'coefficients')
    settings['coefficients'] = {
        name: _coefficient(value, f"coefficients.{name}", grid, name in POSITIVE_COEFFICIENTS)
        for name, value in coefficients_table.items()
    }

    selection_table = _section(data, 'selection')
    for key in ('k1', 'k2'):
        if key in selection_table:
            settings[key] = _integer(selection_table[key], f"selection.{key}", minimum=1)
            if grid is not None and settings[key] > grid.n:
                raise ConfigError(f"must be <= {grid.n} (interior size)", key=f"selection.{key}")

    comparison_table = _section(data, 'comparison')
    if 'placement' in comparison_table:
        settings['placement'] = _enum(Placement, comparison_table['placement'], 'comparison.placement')
    if 'orientation' in comparison_table:
        settings['orientation'] = _enum(Orientation, comparison_table['orientation'], 'comparison.orientation')
    if 'zero_tol' in comparison_table:
        settings['zero_tol'] = _positive_float(comparison_table['zero_tol'], 'comparison.zero_tol', allow_zero=True)
    if 'margin' in comparison_table:
        settings['margin'] = _positive_float(comparison_table['margin'], 'comparison.margin', allow_zero=True)

    eig_table = _section(data, 'eig')
    if 'vectors' in eig_table:
        if not isinstance(eig_table['vectors'], bool):
            raise ConfigError('expected true or false', key='eig.vectors')
        settings['vectors'] = eig_table['vectors']

    output_table = _section(data, 'output')
    if 'dir' in output_table:
        settings['out_dir'] = str(output_table['dir'])

    run_config = RunConfig(**settings)
    _check_exact_scaling(run_config)
    return run_config


def _uses_step(run_config):
    if run_config.command == 'opmat':
        return run_config.operator_kind.is_grunwald
    return run_config.command != 'kernels' and run_config.variant is Variant.GL


def _check_exact_scaling(run_config):
    """The exact backend can only scale G-L operators when h^mu is rational"""
    if run_config.backend is not Backend.EXACT or run_config.grid is None or run_config.grid.h == 1:
        return
    if not _uses_step(run_config):
        return
    for mu in run_config.mu:
        if exact_power(run_config.grid.h, mu) is None:
            raise ConfigError(f"h^mu is irrational for mu={mu}; use backend = \"float\"", key='grid.h')


def atomic_write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + '.tmp')
    with tmp.open('w', encoding='utf-8', newline='\n') as f:
        f.write(text)
        f.flush()
        os.fsync(f.fileno())
    os.replace(tmp, path)


def write_table(path, frame):
    atomic_write_text(path, frame.to_csv(index=False, lineterminator='\n'))


def _mu_tag(order):
    mu = order.mu
    return str(mu.numerator) if mu.denominator == 1 else f"{mu.numerator}-{mu.denominator}"


class ExperimentRunner:
    """Runs one configured command and writes its artifacts"""

    def __init__(self, run_config, out_dir=None, strict=None):
        self.config = run_config
        self.out_dir = Path(out_dir or run_config.out_dir or config.OUTPUT_DIR)
        self.strict = run_config.strict if strict is None else strict
        self.artifacts = []

    def _write_table(self, name, frame):
        path = self.out_dir / name
        write_table(path, frame)
        self.artifacts.append(path)
        logger.info(f"Wrote {path}")

    def _write_text(self, name, text):
        path = self.out_dir / name
        atomic_write_text(path, text)
        self.artifacts.append(path)
        logger.info(f"Wrote {path}")

    def _outcome(self, failed, what):
        if failed:
            logger.warning(what)
            if self.strict:
                return EXIT_FAILED
        return EXIT_OK

    def run(self):
        handler = getattr(self, f"run_{self.config.command}")
        logger.info(f"Running {self.config.command} into {self.out_dir}")
        return handler()

    def run_kernels(self):
        order = self.config.order
        columns = {'index': [str(j) for j in range(self.config.length)]}
        for kind in self.config.kinds:
            sequence = kernel(kind, order, self.config.length)
            columns[kind.value] = [format_scalar(value) for value in sequence.coeffs]
        self._write_table('kernels.csv', pd.DataFrame(columns))
        return EXIT_OK

    def run_opmat(self):
        matrix = build_operator(self.config.operator_kind, self.config.order, self.config.grid)
        header = ['t'] + [str(t) for t in self.config.grid.points]
        self._write_table('operator.csv', pd.DataFrame(matrix_rows(matrix), columns=header))
        return EXIT_OK

    def _identity_failed(self, value):
        if self.config.backend is Backend.EXACT:
            return value != 0
        return value > FLOAT_IDENTITY_TOL

    def run_verify(self):
        order, grid = self.config.order, self.config.grid
        variant = self.config.variant
        rows = []

        # Step 1: integration by parts and transpose identities
        logger.info('Step 1: Checking integration by parts...')
        pairs = [(variant.value, _left_kind(variant))]
        if variant is Variant.RL:
            pairs.append(('RL-sum', OperatorKind.NABLA_LEFT_SUM))
        for label, left_kind in pairs:
            left = build_operator(left_kind, order, grid)
            right = build_operator(partner(left_kind), order, grid)
            rows.append(('by_parts', label, verify_by_parts(left, right, self.config.trials, self.config.seed)))
            rows.append(('transpose', label, transpose_defect(left, right)))

        # Step 2: symmetry of the assembled operator
        logger.info('Step 2: Checking operator symmetry...')
        op = assemble(variant, grid, order, self.config.coefficient('p'), self.config.coefficient('q'))
        rows.append(('symmetry', variant.value, op.symmetry_defect))

        # Step 3: difference composed with sum
        if variant is Variant.RL:
            logger.info('Step 3: Checking difference . sum = identity...')
            rows.append(('composition', variant.value, composition_defect(order, grid)))

        frame = pd.DataFrame({
            'check': [row[0] for row in rows],
            'variant': [row[1] for row in rows],
            'mu': str(order),
            'n': str(grid.n),
            'discrepancy': [format_scalar(row[2]) for row in rows],
        })
        self._write_table('verify.csv', frame)
        failed = [f"{row[0]}/{row[1]}" for row in rows if self._identity_failed(row[2])]
        return self._outcome(bool(failed), f"identities violated: {', '.join(failed)}")

    def run_eig(self):
        grid = self.config.grid
        op = assemble(self.config.variant, grid, self.config.order,
                      self.config.coefficient('p'), self.config.coefficient('q'))
        system = eigensolve(op, self.config.coefficient('r'), self.config.tol)
        logger.info(f"Converged in {system.sweeps} sweeps; r-orthonormality defect {system.weighted_gram_defect():.2e}")
        frame = pd.DataFrame({
            'index': [str(k) for k in range(1, len(system) + 1)],
            'eigenvalue': [format_scalar(value) for value in system.eigenvalues],
            'residual': [format_scalar(value) for value in system.residuals],
        })
        self._write_table('eigenvalues.csv', frame)
        if self.config.vectors:
            columns = {'t': [str(t) for t in grid.points]}
            for k in range(len(system)):
                columns[f"u{k + 1}"] = [format_scalar(value) for value in system.eigenvectors[:, k]]
            self._write_table('eigenvectors.csv', pd.DataFrame(columns))
        return EXIT_OK

    def _compare_one(self, order, name):
        """Write one report; returns (summary row, failed)"""
        problem = self.config.problem(order)
        try:
            report = run_comparison(problem)
        except HypothesisUnmet as e:
            record = {
                'problem': problem.to_dict(),
                'digest': problem.digest(),
                'hypothesis': {'status': 'unmet', 'point': e.point, 'k': e.k_value, 'm': e.m_value},
            }
            self._write_text(name, _json_text(record))
            row = {'mu': str(order), 'hypothesis': 'unmet', 'lambda1': '', 'lambda2': '',
                   'n_u': '', 'n_v': '', 'verdict_first': '', 'verdict_second': ''}
            return row, True

        self._write_text(name, report.to_json())
        row = {
            'mu': str(order),
            'hypothesis': 'met',
            'lambda1': format_scalar(report.pair.lambda1),
            'lambda2': format_scalar(report.pair.lambda2),
            'n_u': str(len(report.zeros_u)),
            'n_v': str(len(report.zeros_v)),
            'verdict_first': report.verdict_first.status.value,
            'verdict_second': report.verdict_second.status.value,
        }
        return row, not (report.verdict_first.holds and report.verdict_second.holds)

    def run_compare(self):
        _, failed = self._compare_one(self.config.order, 'report.json')
        return self._outcome(failed, 'comparison hypothesis unmet or verdict violated')

    def run_sweep(self):
        rows, any_failed = [], False
        for step, order in enumerate(self.config.orders, start=1):
            logger.info(f"Step {step}: mu={order}")
            row, failed = self._compare_one(order, f"sweep/report_mu_{_mu_tag(order)}.json")
            rows.append({'variant': self.config.variant.value, 'k1': str(self.config.k1),
                         'k2': str(self.config.k2), **row})
            any_failed = any_failed or failed
        columns = ['mu', 'variant', 'k1', 'k2', 'hypothesis', 'lambda1', 'lambda2',
                   'n_u', 'n_v', 'verdict_first', 'verdict_second']
        self._write_table('sweep/summary.csv', pd.DataFrame(rows, columns=columns))
        return self._outcome(any_failed, 'sweep has unmet hypotheses or violated verdicts')


def _left_kind(variant):
    return OperatorKind.NABLA_LEFT_DIFF if variant is Variant.RL else OperatorKind.DELTA_LEFT_DIFF


def _json_text(record):
    return json.dumps(record, sort_keys=True, indent=2) + '\n'


def run(run_config, out_dir=None, strict=None):
    """Execute a validated RunConfig; returns the exit status"""
    runner = ExperimentRunner(run_config, out_dir, strict)
    try:
        return runner.run()
    except DfslError as e:
        logger.error(f"{run_config.command} failed: {e}")
        return EXIT_FAILED
    except OSError as e:
        logger.error(f"Failed to write artifacts: {e}")
        return EXIT_FAILED


def build_parser():
    parser = argparse.ArgumentParser(prog='dfsl', description='Discrete fractional Sturm-Liouville experiments')
    parser.add_argument('command', choices=COMMANDS)
    parser.add_argument('--config', required=True, help='TOML experiment document')
    parser.add_argument('--strict', action='store_true', help='exit 1 on unmet hypotheses or violations')
    parser.add_argument('--out', help='output directory')
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK

    try:
        text = Path(args.config).read_text(encoding='utf-8')
    except OSError as e:
        logger.error(f"Cannot read config {args.config}: {e}")
        return EXIT_INPUT

    try:
        run_config = parse_config(text, args.command)
    except ConfigError as e:
        logger.error(f"Invalid config {args.config}: {e}")
        return EXIT_INPUT

    return run(run_config, args.out, args.strict or None)
