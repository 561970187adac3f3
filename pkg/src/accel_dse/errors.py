"""Exception hierarchy shared across the package."""


class AccelDseError(Exception):
    """Base class for all domain errors."""


class ParseError(AccelDseError):
    """Input document is malformed or carries unknown fields."""


class ValidationError(AccelDseError):
    """A domain invariant is violated; message names the offending field."""

    def __init__(self, field: str, message: str = ""):
        self.field = field
        super().__init__(message or field)


class UnsupportedTemplate(AccelDseError):
    pass


class ProfileMissingModule(AccelDseError):
    pass


class ExternalToolFailure(AccelDseError):
    """External evaluator failed; carries captured diagnostics."""

    def __init__(self, message: str, diagnostics: str = ""):
        self.diagnostics = diagnostics
        super().__init__(message)


class DuplicatePoint(AccelDseError):
    pass


class StorageError(AccelDseError):
    pass


class UnknownMetric(AccelDseError):
    pass


class MissingArtifact(AccelDseError):
    def __init__(self, artifact: str):
        self.artifact = artifact
        super().__init__(artifact)


class BudgetExceeded(AccelDseError):
    pass


class ProposalUnparseable(AccelDseError):
    pass


class ProviderUnreachable(AccelDseError):
    pass


class SpaceExhausted(AccelDseError):
    pass


class UnknownPoint(AccelDseError):
    pass


class WorkspaceLocked(AccelDseError):
    pass


class PortInUse(AccelDseError):
    pass
