"""Real-time credit-account risk engine.

Precomputes per-account offline risk from historical summary data with
in-repo classifiers, screens each incoming transaction against standard
rules, runs a cause analysis on the failures, combines online and offline
risk, and flags risky accounts into a human review queue whose verdicts
feed back into stored risk state.
"""

__version__ = "0.1.0"

from .errors import (
    CreditGuardError,
    ConfigError,
    ParseError,
    SchemaMismatchError,
    UnknownAccountError,
)

__all__ = [
    "CreditGuardError",
    "ConfigError",
    "ParseError",
    "SchemaMismatchError",
    "UnknownAccountError",
    "__version__",
]
