"""Exception types shared across the package."""


class TsNoveltyError(Exception):
    """Base class for all package errors."""


class ContractViolationError(TsNoveltyError):
    """A caller broke a documented precondition (bad shape, bad range, ...)."""


class DegenerateDataError(TsNoveltyError):
    """Input data cannot support the requested computation (constant series,
    too few samples, ...)."""


class TieError(TsNoveltyError):
    """A zero first-difference was found where the runs test needs strict
    monotone steps.  Pre-dither discrete data before testing."""


class SmallSampleError(TsNoveltyError):
    """Sample too small for the asymptotic approximation in use."""


class DomainError(TsNoveltyError):
    """Too many values fell outside the expected domain."""


class CheckpointError(TsNoveltyError):
    """A checkpoint file is unreadable, truncated, or has the wrong version."""
