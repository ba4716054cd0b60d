"""Working-precision bookkeeping.

Every numerical operation takes an explicit PrecisionContext; nothing reads
global state except through ctx.workprec(), which is re-entrant.  Note that
mpmath's precision register is process-global: concurrent use is safe across
processes (the CLI model), within a thread, or with asyncio, but not across
preemptive threads.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from mpmath import mp, mpf

from .errors import DomainError

MIN_BITS = 64
MAX_BITS = 4096


@dataclass(frozen=True)
class PrecisionContext:
    """Target precision in bits, plus guard bits absorbing summation rounding.

    Series are truncated so the tail is below 2^-(bits + guard); arithmetic
    runs at bits + guard so the delivered absolute error is below 2^-bits.
    """

    bits: int = 128
    guard: int = 20
    max_radius: int = 20000  # hard cap on theta truncation radius per axis

    def __post_init__(self):
        if self.bits < 8 or self.guard < 0:
            raise DomainError(f"invalid precision context: bits={self.bits}, guard={self.guard}")

    @property
    def working_bits(self) -> int:
        return self.bits + self.guard

    def workprec(self, extra_bits: int = 0):
        """mpmath precision guard for the working precision (plus extra bits)."""
        return mp.workprec(self.working_bits + extra_bits)

    def eps(self) -> mpf:
        """2^-bits, the absolute error target."""
        with mp.workprec(self.working_bits):
            return mpf(2) ** (-self.bits)

    def tol(self, slack_bits: int = 8) -> mpf:
        """Comparison tolerance 2^-(bits - slack_bits) used by identity checks."""
        with mp.workprec(self.working_bits):
            return mpf(2) ** (-(self.bits - slack_bits))

    def higher(self, extra_bits: int = 64) -> "PrecisionContext":
        """Context for the dual-precision self-check mode."""
        return replace(self, bits=self.bits + extra_bits)


DEFAULT_CTX = PrecisionContext()


def validate_cli_bits(bits: int) -> int:
    if not (MIN_BITS <= bits <= MAX_BITS):
        raise DomainError(f"precision must lie in [{MIN_BITS}, {MAX_BITS}], got {bits}")
    return bits
