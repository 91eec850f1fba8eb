"""
Signal-side domain types: signals, Fourier vectors, high-order spectra and
the shift/scale group acting on signals
"""

import cmath
import enum
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from src.core.errors import InvalidSignal, ShapeMismatch


class Domain(enum.Enum):
    """Scalar field of a signal"""
    REAL = "real"
    COMPLEX = "complex"


def _frozen(values: np.ndarray) -> np.ndarray:
    values = np.array(values, copy=True)
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class Signal:
    """Length-N signal over the reals or the complex numbers"""
    values: np.ndarray
    domain: Domain = Domain.REAL

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 1 or values.shape[0] < 1:
            raise InvalidSignal(f"Signal must be a non-empty vector, got shape {values.shape}")

        if self.domain is Domain.REAL:
            if np.iscomplexobj(values):
                if np.any(values.imag != 0):
                    raise InvalidSignal("Real signal has non-zero imaginary parts")
                values = values.real
            values = values.astype(np.float64)
        else:
            values = values.astype(np.complex128)

        object.__setattr__(self, "values", _frozen(values))

    @classmethod
    def real(cls, values) -> "Signal":
        return cls(np.asarray(values, dtype=np.float64), Domain.REAL)

    @classmethod
    def complex(cls, values) -> "Signal":
        return cls(np.asarray(values, dtype=np.complex128), Domain.COMPLEX)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def is_real(self) -> bool:
        return self.domain is Domain.REAL


@dataclass(frozen=True, eq=False)
class FourierVector:
    """DFT coefficients x̂[0..N-1] of a signal"""
    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _frozen(np.asarray(self.coeffs, dtype=np.complex128)))

    @property
    def n(self) -> int:
        return int(self.coeffs.shape[0])


@dataclass(frozen=True, eq=False)
class HighOrderSpectrum:
    """
    Flattened q-th order spectrum M_q(x)

    Index tuple (k_1, ..., k_{q-1}) lives at flat position
    k_1*N^(q-2) + ... + k_{q-1}, i.e. row-major with k_1 most significant.
    """
    q: int
    n: int
    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.complex128)
        if entries.shape != (self.n ** (self.q - 1),):
            raise ShapeMismatch(
                f"Spectrum of N={self.n}, q={self.q} needs {self.n ** (self.q - 1)} entries, got shape {entries.shape}"
            )
        object.__setattr__(self, "entries", _frozen(entries))

    @property
    def size(self) -> int:
        return int(self.entries.shape[0])

    @property
    def tensor(self) -> np.ndarray:
        """View as an array of shape (N,)*(q-1)"""
        return self.entries.reshape((self.n,) * (self.q - 1))

    def flat_index(self, *k: int) -> int:
        if len(k) != self.q - 1:
            raise ShapeMismatch(f"Expected {self.q - 1} indices, got {len(k)}")
        return int(np.ravel_multi_index(tuple(i % self.n for i in k), (self.n,) * (self.q - 1)))

    def at(self, *k: int) -> complex:
        return complex(self.entries[self.flat_index(*k)])


@dataclass(frozen=True)
class GroupElement:
    """
    Element (s, l) of Z_N x Z_q acting as x[n] -> exp(2*pi*i*l/q) * x[(n - s) mod N]
    """
    shift: int
    scale_index: int
    n: int
    q: int

    def __post_init__(self):
        if self.n < 1 or self.q < 1:
            raise ValueError(f"Group needs N >= 1 and q >= 1, got N={self.n}, q={self.q}")
        if not 0 <= self.shift < self.n:
            raise ValueError(f"Shift {self.shift} outside [0, {self.n})")
        if not 0 <= self.scale_index < self.q:
            raise ValueError(f"Scale index {self.scale_index} outside [0, {self.q})")

    @property
    def scale(self) -> complex:
        """The q-th root of unity z, exact at ±1 and ±i"""
        num, den = self.scale_index, self.q
        if (4 * num) % den == 0:
            return (1, 1j, -1, -1j)[(4 * num) // den]
        return cmath.exp(2j * cmath.pi * num / den)

    @property
    def is_real_scale(self) -> bool:
        return (2 * self.scale_index) % self.q == 0

    def compose(self, other: "GroupElement") -> "GroupElement":
        """Element equal to acting by self, then by other"""
        if (self.n, self.q) != (other.n, other.q):
            raise ShapeMismatch(f"Cannot compose elements of Z_{self.n} x Z_{self.q} and Z_{other.n} x Z_{other.q}")
        return GroupElement(
            shift=(self.shift + other.shift) % self.n,
            scale_index=(self.scale_index + other.scale_index) % self.q,
            n=self.n,
            q=self.q,
        )


def group_elements(n: int, q: int, real_only: bool = False) -> Iterator[GroupElement]:
    """Enumerate Z_N x Z_q; with real_only, keep the scales z = ±1"""
    for s in range(n):
        for ell in range(q):
            g = GroupElement(s, ell, n, q)
            if real_only and not g.is_real_scale:
                continue
            yield g

