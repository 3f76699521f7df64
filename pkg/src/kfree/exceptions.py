"""Exception hierarchy shared by all modules."""


class KfreeError(Exception):
    """Base class for errors raised by this package."""


class OutOfRangeError(KfreeError, ValueError):
    """An argument lies outside the supported domain."""


class SieveLimitError(KfreeError):
    """A sieve would exceed the configured limit or memory budget."""


class CutoffError(KfreeError):
    """A requested tail bound cannot be reached within the iteration caps."""


class DecayHypothesisError(KfreeError, ValueError):
    """A local factor or weight violates its stated decay bound."""
