"""Inter-block interference analysis for fractional-delay channels.

The package builds time-, frequency- and prolate-domain signaling bases,
measures the exact inter-block interference a fractional-delay channel
induces between guarded blocks, bounds it with prolate eigenvalues, and
runs Monte-Carlo BER experiments with a per-block LMMSE receiver.
"""

__version__ = "0.1.0"


class DomainError(ValueError):
    """An argument lies outside the domain an operation accepts."""


class NumericalError(RuntimeError):
    """A numerical routine failed (non-convergence, singular system)."""
