"""Exception types shared across the package."""


class RiskProfilerError(Exception):
    """Base class for all domain errors."""


class BankParseError(RiskProfilerError):
    """A bank record could not be parsed; carries the 1-based record index."""

    def __init__(self, message: str, record_no: int):
        super().__init__(f"record {record_no}: {message}")
        self.record_no = record_no


class BankValidationError(RiskProfilerError):
    """Structurally valid bank that violates an invariant (e.g. duplicate id)."""


class BankCapacityError(RiskProfilerError):
    """A question type cannot cover its selection quota plus revalidations."""

    def __init__(self, message: str, qtype=None):
        super().__init__(message)
        self.qtype = qtype


class QuestionExhaustedError(RiskProfilerError):
    """No unused question of the requested type remains in the bank."""


class SessionStateError(RiskProfilerError):
    """Operation attempted on a session in the wrong state."""


class ClockError(RiskProfilerError):
    """Answer timestamp precedes the display timestamp."""


class EmptySessionError(RiskProfilerError):
    """Aggregate requested over a session with no answer records."""


class EventLogError(RiskProfilerError):
    """Malformed or unknown entry in a session event log."""


class PayloadVerificationError(RiskProfilerError):
    """Signed result payload failed decoding or signature verification."""
