"""Exception types shared across the package."""


class FactGraphError(Exception):
    """Base class for every error raised by factgraph."""


class IngestionError(FactGraphError):
    """A corpus, claims file, store, or checkpoint could not be read."""


class StoreLookupError(FactGraphError):
    """A document title or sentence index is not present in the store."""


class ConfigError(FactGraphError):
    """Invalid configuration: unknown keys, bad values, missing components,
    or mismatched dimensions between loaded artifacts."""


class FeatureDisabledError(FactGraphError):
    """An optional feature (e.g. the online wiki client) was used while disabled."""


class RemoteError(FactGraphError):
    """Transport-level failure while talking to an external service."""


class RemoteNotFoundError(RemoteError):
    """The external service answered but does not know the requested resource."""


class PipelineError(FactGraphError):
    """Failure inside a pipeline stage; carries the stage name for reporting."""

    def __init__(self, stage: str, message: str):
        super().__init__(message)
        self.stage = stage
