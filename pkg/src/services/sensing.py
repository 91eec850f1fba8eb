"""
Sensing service
Builds the three families of linear measurement operators on high-order spectra and applies them
"""

import enum
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np
from loguru import logger

from src.core.errors import ShapeMismatch, TooManySamples
from src.schemas.signals import HighOrderSpectrum, Signal
from src.services.spectra import check_order, spectrum


class OperatorKind(str, enum.Enum):
    """Measurement operator families"""
    DENSE_RANDOM = "dense-random"
    SPECTRA_ROWS = "spectra-rows"
    SAMPLING_MASK = "sampling-mask"


def _readonly(array: Optional[np.ndarray]) -> Optional[np.ndarray]:
    if array is not None:
        array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class MeasurementOperator:
    """
    Linear map A from C^(N^(q-1)) to C^K

    Dense kinds carry `matrix` (K x R); SPECTRA_ROWS also keeps the real
    generator signals whose spectra form the rows. SAMPLING_MASK carries the
    sorted `indices` of the K selected entries. The payload is always
    regenerated from `seed`, never serialized.
    """
    kind: OperatorKind
    k: int
    n: int
    q: int
    seed: int
    matrix: Optional[np.ndarray] = None
    indices: Optional[np.ndarray] = None
    generators: Optional[np.ndarray] = None

    @property
    def r(self) -> int:
        return self.n ** (self.q - 1)

    @property
    def shape(self) -> tuple:
        return (self.k, self.r)

    def dense(self) -> np.ndarray:
        """Materialize as a K x R matrix (0/1 for sampling masks)"""
        if self.kind is OperatorKind.SAMPLING_MASK:
            selection = np.zeros(self.shape)
            selection[np.arange(self.k), self.indices] = 1.0
            return selection
        return np.array(self.matrix)

    def to_descriptor(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "K": self.k, "N": self.n, "q": self.q, "seed": self.seed}

    @classmethod
    def from_descriptor(cls, descriptor: Dict[str, Any]) -> "MeasurementOperator":
        return build_operator(
            OperatorKind(descriptor["kind"]),
            k=int(descriptor["K"]),
            n=int(descriptor["N"]),
            q=int(descriptor["q"]),
            seed=int(descriptor["seed"]),
        )


@dataclass(frozen=True, eq=False)
class MeasurementVector:
    """Observed y = A M_q(x)"""
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.complex128)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def k(self) -> int:
        return int(self.values.shape[0])


def build_operator(
    kind: OperatorKind,
    k: int,
    n: int,
    q: int,
    seed: int,
    max_entries: Optional[int] = None
) -> MeasurementOperator:
    """
    Build a measurement operator deterministically from its seed

    Args:
        kind: Operator family
        k: Number of measurements (rows)
        n: Signal length
        q: Spectrum order
        seed: Non-negative integer seeding numpy's default generator
        max_entries: Cap on N^(q-1)

    Returns:
        Immutable MeasurementOperator
    """
    kind = OperatorKind(kind)
    r = check_order(n, q, max_entries)
    if k < 1:
        raise ValueError(f"K must be positive, got {k}")
    if seed < 0:
        raise ValueError(f"Seed must be non-negative, got {seed}")

    rng = np.random.default_rng(seed)
    logger.debug(f"Building {kind.value} operator K={k} N={n} q={q} seed={seed}")

    if kind is OperatorKind.DENSE_RANDOM:
        matrix = rng.standard_normal((k, r))
        return MeasurementOperator(kind, k, n, q, seed, matrix=_readonly(matrix))

    if kind is OperatorKind.SPECTRA_ROWS:
        generators = rng.standard_normal((k, n))
        rows = np.stack([spectrum(Signal.real(w), q, max_entries).entries for w in generators])
        return MeasurementOperator(
            kind, k, n, q, seed,
            matrix=_readonly(rows),
            generators=_readonly(generators),
        )

    if k > r:
        raise TooManySamples(k, r)
    indices = np.sort(rng.choice(r, size=k, replace=False)).astype(np.intp)
    return MeasurementOperator(kind, k, n, q, seed, indices=_readonly(indices))


def _check_spectrum(op: MeasurementOperator, m: HighOrderSpectrum):
    if (m.n, m.q) != (op.n, op.q):
        raise ShapeMismatch(f"Operator built for N={op.n}, q={op.q} applied to a spectrum with N={m.n}, q={m.q}")


def apply(op: MeasurementOperator, m: HighOrderSpectrum) -> MeasurementVector:
    """y = A M: matrix-vector product for dense kinds, gather for sampling masks"""
    _check_spectrum(op, m)
    if op.kind is OperatorKind.SAMPLING_MASK:
        return MeasurementVector(m.entries[op.indices])
    return MeasurementVector(op.matrix @ m.entries)


def measure(op: MeasurementOperator, x: Signal) -> MeasurementVector:
    """y = A M_q(x)"""
    if x.n != op.n:
        raise ShapeMismatch(f"Operator built for N={op.n} applied to a signal of length {x.n}")
    return apply(op, spectrum(x, op.q))


def compose_jacobian(op: MeasurementOperator, jacobian: np.ndarray) -> np.ndarray:
    """Chain rule for x -> A M_q(x): returns A @ J of shape (K, N)"""
    jacobian = np.asarray(jacobian)
    if jacobian.ndim != 2 or jacobian.shape != (op.r, op.n):
        raise ShapeMismatch(f"Expected a Jacobian of shape {(op.r, op.n)}, got {jacobian.shape}")
    if op.kind is OperatorKind.SAMPLING_MASK:
        return jacobian[op.indices]
    return op.matrix @ jacobian
