"""
errors.py

Exception types raised by the x0n pipelines. Each one subclasses a builtin so
callers that only know about ValueError / RuntimeError still catch them.
"""


class CongruenceError(ValueError):
    """Inputs violate a divisibility or congruence condition (D != r^2 mod 4N, t not dividing N)."""


class PrecisionError(RuntimeError):
    """The available truncation order or node count cannot reach the requested tolerance."""


class ConsistencyError(RuntimeError):
    """Two independent constructions of the same object disagree."""


class DivergenceError(RuntimeError):
    """A Green function was evaluated on its singular locus."""

    def __init__(self, message: str, vector=None):
        super().__init__(message)
        self.vector = vector


class UndeterminedPairingError(KeyError):
    """The intersection table has no value for the requested pair."""

    def __str__(self):
        return str(self.args[0]) if self.args else "pairing not determined"
