"""Error taxonomy shared by the ledger, tally engine, and gateway.

Every error carries a stable machine-readable ``code`` so the HTTP
gateway can surface ledger rejections verbatim.
"""

from __future__ import annotations


class CovoteError(Exception):
    """Base class; ``code`` is the wire-visible identifier."""

    code = "Error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)


class ConfigError(CovoteError):
    code = "ConfigError"


class NotEligible(CovoteError):
    code = "NotEligible"


class AlreadyRegistered(CovoteError):
    code = "AlreadyRegistered"


class DuplicateKey(CovoteError):
    code = "DuplicateKey"


class PhaseError(CovoteError):
    code = "PhaseError"


class SessionAborted(CovoteError):
    code = "SessionAborted"


class MalformedBallot(CovoteError):
    code = "MalformedBallot"


class NotFound(CovoteError):
    code = "NotFound"


class AlreadyReleased(CovoteError):
    code = "AlreadyReleased"


class ThresholdNotMet(CovoteError):
    code = "ThresholdNotMet"


class InconsistentShares(CovoteError):
    code = "InconsistentShares"


class InvalidCiphertext(CovoteError):
    code = "InvalidCiphertext"


class TamperDetected(CovoteError):
    code = "TamperDetected"


class RuleError(CovoteError):
    code = "RuleError"


class BallotFormatError(CovoteError):
    code = "BallotFormatError"
