"""Exception hierarchy.

Two families are kept apart because the command line maps them to
different exit codes: :class:`MethodError` covers situations where the
identification method itself cannot produce an answer from the data,
:class:`DataFormatError` covers malformed input files.
"""


class ApidentError(Exception):
    """Base class for every error raised by this package."""


class MethodError(ApidentError):
    """The identification procedure cannot proceed on this data."""


class DataFormatError(ApidentError):
    """An input file violates the expected layout."""


class CouplingCollision(MethodError):
    pass


class GridTooCoarse(MethodError):
    pass


class ZeroInputExponent(MethodError):
    pass


class AmbiguousQuadrant(MethodError):
    """The frequency response point does not fall cleanly in quadrants 1-3."""

    def __init__(self, message, w=None):
        super().__init__(message)
        self.w = w


class InsufficientFrequencies(MethodError):
    pass


class RankDeficient(MethodError):
    pass


class NoConsistentOrder(MethodError):
    """No trial order satisfied the consistency criterion.

    ``model`` carries the per-order diagnostics (and ``report`` the partial
    pipeline report, when raised from the pipeline) so callers can still
    inspect what was tried.
    """

    def __init__(self, message, model=None):
        super().__init__(message)
        self.model = model
        self.report = None


class PoleOnFrequency(MethodError):
    pass


class EmptyMatchedSet(MethodError):
    pass


class NonUniformSampling(DataFormatError):
    pass


class RaggedColumns(DataFormatError):
    pass


class NonNumericCell(DataFormatError):
    pass


class ReportError(ApidentError):
    pass
