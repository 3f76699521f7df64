"""Runtime knobs.  Environment variables override the defaults."""

import os

SIEVE_LIMIT_ENV = "KFREE_SIEVE_LIMIT"

DEFAULT_SIEVE_LIMIT = 10**8
# bytes; spf (int32) + mu (int8) tables must fit
MEMORY_BUDGET = 1 << 30
SEGMENT_SIZE = 1 << 22
# factorize() falls back to trial division up to this n
TRIAL_DIVISION_LIMIT = 10**14

_sieve_limit_override = None


def set_sieve_limit(limit):
    """Override the sieve limit for this process; ``None`` restores the default."""
    global _sieve_limit_override
    if limit is not None and limit < 1:
        raise ValueError("sieve limit must be positive")
    _sieve_limit_override = limit


def sieve_limit() -> int:
    if _sieve_limit_override is not None:
        return _sieve_limit_override
    raw = os.environ.get(SIEVE_LIMIT_ENV)
    if raw is None:
        return DEFAULT_SIEVE_LIMIT
    value = int(float(raw))
    if value < 1:
        raise ValueError(f"{SIEVE_LIMIT_ENV} must be positive, got {raw!r}")
    return value
