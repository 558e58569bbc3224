"""Exception types shared across the toolkit."""


class CodetrimError(Exception):
    """Base class for all toolkit errors."""


class LexError(CodetrimError):
    def __init__(self, offset, message="no lexer rule matches"):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class ParseError(CodetrimError):
    def __init__(self, offset, expected):
        expected = sorted(set(expected))
        super().__init__(f"parse error at offset {offset}, expected one of {expected}")
        self.offset = offset
        self.expected = expected


class GrammarError(CodetrimError):
    """Malformed grammar definition."""


class OracleSetupError(CodetrimError):
    """The interestingness script or its working directory is unusable."""


class AuthError(CodetrimError):
    """Missing or rejected API credentials."""


class RateLimited(CodetrimError):
    """Provider kept rate-limiting after all retries."""


class TransportError(CodetrimError):
    """Wire-level or fixture failure talking to the model."""


class MissingHole(CodetrimError):
    """A prompt template lacks a required substitution hole."""


class SchemaError(CodetrimError):
    """A transformation definition file does not validate."""


class InternalReducerError(CodetrimError):
    """A generated candidate failed to parse; this is a bug, not an input error."""
