"""Exception types shared across the package."""


class StagecraftError(Exception):
    """Base class for all domain errors."""


class GatewayError(StagecraftError):
    """Base class for chat-backend failures."""


class BackendUnavailable(GatewayError):
    """The HTTP backend could not be reached, or retries were exhausted."""


class AuthFailure(GatewayError):
    """The backend rejected the configured credentials."""


class ScriptExhausted(GatewayError):
    """The mock backend has no unconsumed entry matching the request."""


class InvalidRequest(GatewayError):
    """The chat request violates its invariants or was rejected as malformed."""


class ProviderUnavailable(StagecraftError):
    """The search provider could not be reached."""


class EmptyResults(StagecraftError):
    """A broad search returned no hits at all; the claim is unverifiable."""


class NotSupportedLabel(StagecraftError):
    """Only claims with a Supported verdict may enter the memory store."""


class StorageFailure(StagecraftError):
    """The memory store could not persist a record."""


class SessionStopped(StagecraftError):
    """An operation was attempted on a session that is no longer active."""


class InvalidRange(StagecraftError):
    """Grid axes need at least two points and min < max."""


class TooFewMaxima(StagecraftError):
    """Fewer than two interference maxima were found in the scan window."""


class IoFailure(StagecraftError):
    """An output artifact could not be written."""


class PipelineAborted(StagecraftError):
    """A fatal dependency error stopped the pipeline partway.

    Carries the partial report assembled before the failure.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
