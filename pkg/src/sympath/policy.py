"""Shared numeric policy (tolerances, seed) and the error taxonomy.

Every integer-valued output in this package is obtained by thresholding
floating-point evidence; the thresholds live here so they are explicit,
configurable and testable.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


class SympathError(Exception):
    """Base class for all package errors."""


class ValidationError(SympathError):
    """Bad input: wrong shape, non-symplectic matrix, malformed file.

    CLI exit status 1.
    """


class ConditioningError(SympathError):
    """Numerical conditioning failure (degenerate Gram matrix, singular
    block, unresolvable eigenvalue cluster).

    CLI exit status 2.
    """


class RefinementError(ValidationError):
    """A sampled path violates the trust-region contract and carries no
    generator that would allow resampling."""


class CompletionError(ConditioningError):
    """Completion-path construction left the regular set; the offending
    intermediate matrix is attached as ``.matrix``."""

    def __init__(self, message, matrix=None):
        super().__init__(message)
        self.matrix = matrix


class PerturbationCoverageError(ConditioningError):
    """The degenerate-index perturbation family failed the nullity-spread
    assertion, so the returned minimum cannot be trusted."""


class OracleInconclusiveError(ConditioningError):
    """The crossing oracle met a tangential or on-surface segment."""


class GapError(ConditioningError):
    """Angular gap between unit-circle eigenvalues too small for the
    requested splitting-number epsilon."""

    def __init__(self, message, suggested_eps=None):
        super().__init__(message)
        self.suggested_eps = suggested_eps


class TruncationError(ConditioningError):
    """Fourier-truncation Morse index failed to stabilize across doublings."""

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = tuple(trace)


class ResonanceError(ValidationError):
    """Frequency ratio too close to a low-order rational for the isolated
    orbit assumption."""


class DomainError(ValidationError):
    """Unbounded or otherwise inadmissible integration region / argument."""


@dataclass(frozen=True)
class NumericPolicy:
    """Tolerances and the RNG seed used by every module.

    All tolerances must lie in (0, 1e-2].
    """

    tol_sym: float = 1e-10      # symplecticity residual, max-abs norm
    tol_rank: float = 1e-8      # relative singular-value threshold
    tol_det: float = 1e-10      # component-sign determinant threshold
    tol_cluster: float = 1e-6   # eigenvalue clustering / unit-circle snap
    seed: int = 20260810

    def __post_init__(self):
        for name in ("tol_sym", "tol_rank", "tol_det", "tol_cluster"):
            value = getattr(self, name)
            if not (0.0 < value <= 1e-2):
                raise ValidationError(f"{name}={value} outside (0, 1e-2]")

    def with_seed(self, seed: int) -> "NumericPolicy":
        return replace(self, seed=seed)


DEFAULT_POLICY = NumericPolicy()
