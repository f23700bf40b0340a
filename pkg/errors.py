"""
Exception hierarchy shared by the kernel, operator, eigen and comparison layers.
"""


class DfslError(Exception):
    """Base class for every error raised by this package"""


class DomainError(DfslError, ValueError):
    """An argument lies outside the domain of the requested operation"""


class GridMismatchError(DfslError, ValueError):
    """Two grid-bound objects live on different grids"""


class SizeLimitError(DfslError):
    """Dense storage cap exceeded"""


class PairMismatchError(DfslError, ValueError):
    """Operators passed as an adjoint pair do not form one"""


class TrivialSolutionError(DfslError, ValueError):
    """Zero detection was asked to scan an identically-zero function"""


class ConvergenceError(DfslError, RuntimeError):
    def __init__(self, message, sweeps, off_norm):
        super().__init__(message)
        self.sweeps = sweeps
        self.off_norm = off_norm


class HypothesisUnmet(DfslError):
    """k(t) < m(t) fails at some interior point"""

    def __init__(self, point, k_value, m_value):
        super().__init__(
            f"comparison hypothesis k < m fails at t={point}: k={k_value!r}, m={m_value!r}"
        )
        self.point = point
        self.k_value = k_value
        self.m_value = m_value


class ConfigError(DfslError):
    def __init__(self, message, key=None, line=None, column=None):
        location = ''
        if key:
            location = f"{key}: "
        elif line is not None:
            location = f"line {line}, column {column}: "
        super().__init__(location + message)
        self.key = key
        self.line = line
        self.column = column
