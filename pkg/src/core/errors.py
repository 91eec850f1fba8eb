"""
Error types raised by the spectra, sensing, solver and recovery services
"""

from pathlib import Path
from typing import Union


class HosRecoverError(Exception):
    """Base class for all library errors"""


class InvalidSignal(HosRecoverError, ValueError):
    """Signal values violate the length or real-domain invariants"""


class SpectrumOrderTooLow(HosRecoverError, ValueError):
    """Spectra of order q < 3 do not determine an orbit"""

    def __init__(self, q: int):
        super().__init__(f"Spectrum order must be at least 3, got q={q}")
        self.q = q


class DimensionOverflow(HosRecoverError, ValueError):
    """N^(q-1) exceeds the configured entry cap"""

    def __init__(self, n: int, q: int, cap: int):
        super().__init__(f"Spectrum of N={n}, q={q} has {n ** (q - 1)} entries, above the cap of {cap}")
        self.n = n
        self.q = q
        self.cap = cap


class ShapeMismatch(HosRecoverError, ValueError):
    """Operands have inconsistent N, q, K or matrix shapes"""


class TooManySamples(HosRecoverError, ValueError):
    """A sampling mask cannot select more entries than the spectrum has"""

    def __init__(self, k: int, r: int):
        super().__init__(f"Cannot sample K={k} distinct entries from a spectrum of length {r}")
        self.k = k
        self.r = r


class NonFiniteObjective(HosRecoverError, ArithmeticError):
    """Descent produced an overflowing or NaN objective"""


class ZeroTruthSignal(HosRecoverError, ValueError):
    """Relative error is undefined against the zero signal"""


class AssumptionViolated(HosRecoverError, ValueError):
    """Input to the recursive recovery breaks its unit-modulus assumptions"""


class InconsistentInput(HosRecoverError, ValueError):
    """Recovered Fourier coefficients are not conjugate symmetric"""


class OutputWriteError(HosRecoverError, OSError):
    """An output file could not be written"""

    def __init__(self, path: Union[str, Path], cause: Exception):
        super().__init__(f"Failed to write {path}: {cause}")
        self.path = Path(path)
        self.cause = cause
