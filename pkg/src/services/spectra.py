"""
High-order spectra service
DFTs, q-th order spectra M_q(x), their Jacobians, and the shift/scale action
"""

from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy import fft as sp_fft

from src.core.config import settings
from src.core.errors import DimensionOverflow, ShapeMismatch, SpectrumOrderTooLow
from src.schemas.signals import Domain, FourierVector, GroupElement, HighOrderSpectrum, Signal


def check_order(n: int, q: int, max_entries: Optional[int] = None) -> int:
    """
    Validate (N, q) for a spectrum and return its length R = N^(q-1)

    Raises:
        SpectrumOrderTooLow: q < 3
        DimensionOverflow: R above max_entries (settings.max_spectrum_entries by default)
    """
    if q < 3:
        raise SpectrumOrderTooLow(q)
    cap = settings.max_spectrum_entries if max_entries is None else max_entries
    r = n ** (q - 1)
    if r > cap:
        raise DimensionOverflow(n, q, cap)
    return r


@lru_cache(maxsize=32)
def dft_matrix(n: int) -> np.ndarray:
    """F[k, m] = exp(-2*pi*i*k*m/N), so that x̂ = F @ x"""
    k = np.arange(n)
    # reduce k*m mod N before the exponential to keep the phases accurate
    matrix = np.exp(-2j * np.pi * (np.outer(k, k) % n) / n)
    matrix.setflags(write=False)
    return matrix


@lru_cache(maxsize=32)
def spectrum_indices(n: int, q: int) -> np.ndarray:
    """
    Index table of shape (R, q)

    Row r holds (k_1, ..., k_{q-1}, k_q) for flat position r, where
    k_q = (-k_1 - ... - k_{q-1}) mod N closes the frequency sum.
    """
    grids = np.indices((n,) * (q - 1)).reshape(q - 1, -1).T
    closing = (-grids.sum(axis=1)) % n
    table = np.column_stack([grids, closing]).astype(np.intp)
    table.setflags(write=False)
    return table


def dft(x: Signal) -> FourierVector:
    """x̂[k] = sum_n x[n] exp(-2*pi*i*n*k/N), no normalization"""
    return FourierVector(sp_fft.fft(x.values.astype(np.complex128)))


def spectrum(x: Signal, q: int, max_entries: Optional[int] = None) -> HighOrderSpectrum:
    """
    Compute the q-th order spectrum of a signal

    Args:
        x: Signal of length N
        q: Spectrum order, at least 3
        max_entries: Cap on N^(q-1), settings.max_spectrum_entries by default

    Returns:
        HighOrderSpectrum with entries x̂[k_1]...x̂[k_{q-1}] x̂[-k_1-...-k_{q-1}]
    """
    check_order(x.n, q, max_entries)
    coeffs = dft(x).coeffs
    factors = coeffs[spectrum_indices(x.n, q)]
    return HighOrderSpectrum(q=q, n=x.n, entries=np.prod(factors, axis=1))


def spectrum_entries(x: Signal, q: int, index_tuples: Sequence[Sequence[int]]) -> np.ndarray:
    """Evaluate selected entries M_q(x)[k_1, ..., k_{q-1}] without building the full spectrum"""
    if q < 3:
        raise SpectrumOrderTooLow(q)
    index = np.asarray(index_tuples, dtype=np.intp).reshape(-1, q - 1) % x.n
    closing = (-index.sum(axis=1)) % x.n
    coeffs = dft(x).coeffs
    return np.prod(coeffs[index], axis=1) * coeffs[closing]


def spectrum_jacobian(x: Signal, q: int, max_entries: Optional[int] = None) -> np.ndarray:
    """
    Derivative of M_q with respect to the N entries of x

    Product rule through the DFT: column m of row (k_1..k_q) is
    sum_j F[k_j, m] * prod_{i != j} x̂[k_i]. For a real signal the same
    matrix is the derivative along the real coordinates.

    Returns:
        Complex matrix of shape (N^(q-1), N)
    """
    check_order(x.n, q, max_entries)
    coeffs = dft(x).coeffs
    index = spectrum_indices(x.n, q)
    factors = coeffs[index]
    transform = dft_matrix(x.n)

    jacobian = np.zeros((index.shape[0], x.n), dtype=np.complex128)
    for j in range(q):
        others = np.prod(np.delete(factors, j, axis=1), axis=1)
        jacobian += others[:, None] * transform[index[:, j]]
    return jacobian


def act(g: GroupElement, x: Signal) -> Signal:
    """
    Apply (s, l) to x: output[n] = z * x[(n - s) mod N]

    A real signal stays real when z = ±1 and is promoted to complex otherwise.
    """
    if g.n != x.n:
        raise ShapeMismatch(f"Group element for N={g.n} applied to a signal of length {x.n}")

    z = g.scale
    shifted = np.roll(x.values, g.shift)
    if x.is_real and g.is_real_scale:
        return Signal(shifted * int(z.real), Domain.REAL)
    return Signal(z * shifted.astype(np.complex128), Domain.COMPLEX)
