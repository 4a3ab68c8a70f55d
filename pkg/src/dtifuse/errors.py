"""Exception hierarchy shared by all dtifuse modules.

Everything derives from DtiFuseError so callers can catch the package's
failures with a single except clause. The CLI maps these onto exit codes:
invalid input -> 1, unreadable resources -> 2, all scorers failed -> 3.
"""


class DtiFuseError(Exception):
    """Base class for all dtifuse errors."""


class InvalidEntity(DtiFuseError):
    """Entity name is empty after trimming, or otherwise unusable."""


class SameEntity(DtiFuseError):
    """Drug and target normalize to the same entity; hop scoring is undefined."""


class InvalidWeights(DtiFuseError):
    """Fusion weights violate the convex-combination constraints."""


class RetrievalError(DtiFuseError):
    """Search backend could not read or query its result source."""


class GraphCacheError(DtiFuseError):
    """Knowledge-graph cache file is missing, truncated or corrupt."""


class PredictorUnavailable(DtiFuseError):
    """Remote prediction service unreachable or unable to serve the model."""


class MalformedPrediction(DtiFuseError):
    """Prediction response was not a finite number in the expected schema."""


class UnknownEntity(DtiFuseError):
    """Drug or target name not present in the loaded catalog."""


class IngestError(DtiFuseError):
    """Input table could not be read; message carries row diagnostics."""


class InvalidProblem(DtiFuseError):
    """Weight-fit problem has non-finite entries or inconsistent shapes."""


class InvalidSeries(DtiFuseError):
    """Paired series have mismatched lengths, too few points, or non-finite values."""


class DegenerateSeries(DtiFuseError):
    """A series is constant, so R^2 or correlation is undefined."""


class InvalidQuery(DtiFuseError):
    """Pipeline query violates the weight constraints or names one entity twice."""


class PipelineError(DtiFuseError):
    """All three scorers failed for a query.

    Carries the assembled report (with per-agent failure reasons) as
    the ``report`` attribute when available.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class BatchSetupError(DtiFuseError):
    """Shared batch resources (graph, corpus, catalog) could not be loaded."""
