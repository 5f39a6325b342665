"""Exception hierarchy shared across the toolkit."""


class FairprobeError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(FairprobeError):
    """Invalid domain, parameter spec, or planted-bias region."""


class SchemaError(FairprobeError):
    """A file is missing a required column, key, or section."""


class ParseError(FairprobeError):
    """A cell or line could not be parsed into the expected type."""


class BoundError(FairprobeError):
    """A value falls outside its parameter's declared integer range."""


class TrainingError(FairprobeError):
    """Training could not proceed (empty data, bad labels)."""


class ContractError(FairprobeError):
    """A caller violated an operation precondition."""


class TransportError(FairprobeError):
    """External model process failed or disconnected; retryable."""


class ProtocolError(FairprobeError):
    """External model spoke the wire protocol incorrectly; fatal."""


class InvariantError(FairprobeError):
    """Internal state violated an invariant that should be unreachable."""
