"""
Closed-form recursive phase recovery for real signals with a unit-modulus
spectrum, known mean and x̂[1] = 1

For a real signal, M_3(x)[k, N-1] = x̂[k] conj(x̂[1]) conj(x̂[k-1]), so with
x̂[1] = 1 each coefficient follows from the previous one. The trispectrum path
reads M_4(x)[k, N-1, 0], which carries the extra factor x̂[0] (the known real
mean) and is divided by it.
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy import fft as sp_fft

from src.core.errors import AssumptionViolated, InconsistentInput, ShapeMismatch
from src.schemas.signals import Signal
from src.services.spectra import spectrum_entries

MODULUS_TOL = 1e-8
SYMMETRY_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class PhaseRecoveryInput:
    """The N-2 consumed spectrum entries plus the known mean x̂[0]"""
    entries: np.ndarray
    mean: float
    n: int
    q: int = 3

    def __post_init__(self):
        if self.q not in (3, 4):
            raise ValueError(f"Recursive recovery supports q in (3, 4), got {self.q}")
        if self.n < 2:
            raise ValueError(f"Recursive recovery needs N >= 2, got {self.n}")
        entries = np.array(self.entries, dtype=np.complex128)
        if entries.shape != (self.n - 2,):
            raise ShapeMismatch(f"Expected {self.n - 2} spectrum entries for N={self.n}, got shape {entries.shape}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)


def consumed_indices(n: int, q: int = 3) -> List[Tuple[int, ...]]:
    """Index tuples read by the recursion: (k, N-1) or (k, N-1, 0) for k = 2..N-1"""
    if q == 3:
        return [(k, n - 1) for k in range(2, n)]
    if q == 4:
        return [(k, n - 1, 0) for k in range(2, n)]
    raise ValueError(f"Recursive recovery supports q in (3, 4), got {q}")


def select_entries(x: Signal, q: int = 3) -> PhaseRecoveryInput:
    """Read the consumed entries and the mean from a signal"""
    mean = float(np.sum(x.values).real)
    entries = spectrum_entries(x, q, consumed_indices(x.n, q)) if x.n > 2 else np.zeros(0, dtype=np.complex128)
    return PhaseRecoveryInput(entries=entries, mean=mean, n=x.n, q=q)


def forward_construct(n: int, rng: np.random.Generator, mean: float = 1.0) -> Signal:
    """
    Draw a real signal satisfying the recursion's assumptions

    |x̂[k]| = 1 for k >= 1, x̂[1] = 1, x̂[0] = mean, random phases for
    2 <= k < N/2 and a random sign at k = N/2 when N is even.
    """
    if n < 2:
        raise ValueError(f"Forward construction needs N >= 2, got {n}")
    coeffs = np.zeros(n, dtype=np.complex128)
    coeffs[0] = mean
    coeffs[1] = 1.0
    for k in range(2, (n + 1) // 2):
        coeffs[k] = np.exp(1j * rng.uniform(0, 2 * np.pi))
    if n % 2 == 0 and n > 2:
        coeffs[n // 2] = rng.choice([-1.0, 1.0])
    for k in range(1, (n + 1) // 2):
        coeffs[n - k] = np.conj(coeffs[k])
    return Signal.real(sp_fft.ifft(coeffs).real)


def recursive_recover(inp: PhaseRecoveryInput) -> Signal:
    """
    Recover the real signal from its consumed spectrum entries

    Raises:
        AssumptionViolated: an entry is not of unit modulus (after dividing out
            the mean for q=4), or the mean is zero on the trispectrum path
        InconsistentInput: the recovered coefficients are not conjugate symmetric
    """
    values = inp.entries
    if inp.q == 4:
        if inp.mean == 0:
            raise AssumptionViolated("Trispectrum recursion divides by the mean, which is zero")
        values = values / inp.mean

    deviation = np.abs(np.abs(values) - 1.0)
    if deviation.size and np.max(deviation) > MODULUS_TOL:
        k = int(np.argmax(deviation)) + 2
        raise AssumptionViolated(f"Entry for k={k} has modulus {np.abs(values[k - 2]):.6g}, expected 1")

    coeffs = np.empty(inp.n, dtype=np.complex128)
    coeffs[0] = inp.mean
    coeffs[1] = 1.0
    # x̂[k] = M[k, N-1] x̂[k-1] since x̂[1] = 1 and all magnitudes are one
    coeffs[2:] = np.cumprod(values)

    mirrored = np.conj(coeffs[(-np.arange(inp.n)) % inp.n])
    asymmetry = np.max(np.abs(coeffs - mirrored))
    if asymmetry > SYMMETRY_TOL:
        raise InconsistentInput(f"Recovered coefficients break conjugate symmetry by {asymmetry:.3g}")

    return Signal.real(sp_fft.ifft(coeffs).real)
