class CreditGuardError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(CreditGuardError):
    """Malformed input data (dataset files, transaction lines)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(CreditGuardError):
    """Invalid rule or pipeline configuration, rejected at load time."""


class SchemaMismatchError(CreditGuardError):
    """Instance does not conform to the schema a model was trained on."""


class UnknownAccountError(CreditGuardError):
    """Transaction references an account with no stored risk state."""

    def __init__(self, account_id):
        super().__init__(f"unknown account: {account_id}")
        self.account_id = account_id


class FlagStateError(CreditGuardError):
    """Flag does not exist or was already resolved."""
