"""Independent finite-quotient DFT oracle.

A modulated step function supported in the ball of radius q^M and locally
constant at scale q^-r factors through the finite group (Z/q^(M+r))^k; the
q-adic Fourier transform then coincides with the standard discrete Fourier
transform on that group, up to the Haar cell volume q^(-rk).

This module evaluates functions pointwise on the quotient grid and
transforms with numpy's FFT, giving a correctness anchor that shares no
code path with the symbolic term calculus in stepfn.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import BudgetExceededError
from .qadic import QRational, QVector

__all__ = [
    "grid_geometry",
    "evaluate_on_grid",
    "dft_grid",
    "inverse_dft_grid",
    "convolve_grids",
    "grid_l2_norm",
    "grid_point",
    "freq_grid_point",
]

DEFAULT_GRID_BUDGET = 40_000_000


def grid_geometry(f) -> tuple[int, int]:
    """(M, r): support radius exponent and constancy scale of the function.

    The spatial grid is the ball of radius q^M sampled at step q^-r; the
    frequency grid is the ball of radius q^r sampled at step q^-M.
    """
    M = 0
    r = max(0, f.scale_exp)
    for _, b, cube in f.terms:
        M = max(M, -cube.scale_exp)
        for c in cube.corner:
            if not c.is_zero:
                M = max(M, -c.valuation)
        for bi in b:
            if not bi.is_zero:
                r = max(r, -bi.valuation)
    return M, r


def _axis_offsets(q: int, M: int, value: QRational) -> int:
    """value as an integer multiple of q^-M (value must have valuation >= -M)."""
    if value.is_zero:
        return 0
    if value.valuation < -M:
        raise ValueError(f"{value} has digits below the grid resolution q^-{M}")
    return value.unit * q ** (value.valuation + M)


def evaluate_on_grid(f, M: int, r: int, budget: int = DEFAULT_GRID_BUDGET) -> np.ndarray:
    """Pointwise values on the quotient grid, shape (q^(M+r),) * k.

    Index u along an axis encodes the point u * q^-M, which enumerates the
    ball of radius q^M modulo q^r.  Works for spatial or frequency grids
    alike (swap the roles of M and r for the latter).
    """
    q, k = f.q, f.k
    n = q ** (M + r)
    if n**k > budget:
        raise BudgetExceededError(f"grid of {n**k} points exceeds the budget", n**k, budget)
    u = np.arange(n, dtype=np.int64)
    grid = np.zeros((n,) * k, dtype=np.complex128)
    for coeff, b, cube in f.terms:
        axis_vectors = []
        for i in range(k):
            w = _axis_offsets(q, M, cube.corner[i])
            step = q ** (cube.scale_exp + M)  # membership along the axis: u = w mod step
            if step < 1:
                raise ValueError("grid resolution coarser than the cube side")
            mask = (u - w) % step == 0
            bi = b[i]
            if bi.is_zero:
                axis_vectors.append(mask.astype(np.complex128))
            else:
                # b_i * x_i = unit * u * q^(val - M); over denominator n the
                # numerator unit * u * q^(val + r) is integral because any
                # canonical modulation on this grid has val >= -r.
                if bi.valuation + r < 0:
                    raise ValueError(f"modulation {bi} finer than the grid dual q^{r}")
                mult = bi.unit * q ** (bi.valuation + r) % n
                phase = (mult * u) % n
                axis_vectors.append(mask * np.exp(2j * np.pi * phase / n))
        term_grid = axis_vectors[0].reshape((n,) + (1,) * (k - 1))
        for i in range(1, k):
            term_grid = term_grid * axis_vectors[i].reshape((1,) * i + (n,) + (1,) * (k - i - 1))
        grid = grid + coeff * term_grid
    return grid


def dft_grid(grid: np.ndarray, q: int, r: int) -> np.ndarray:
    """Forward transform of spatial grid values (cell volume q^-r per axis).

    Output indexes the frequency grid: index s encodes s * q^-r.
    """
    k = grid.ndim
    return np.fft.fftn(grid) * float(Fraction(q) ** (-r * k))


def inverse_dft_grid(grid: np.ndarray, q: int, M: int) -> np.ndarray:
    """Inverse transform of frequency grid values (cell volume q^-M per axis)."""
    k = grid.ndim
    n = grid.shape[0]
    return np.fft.ifftn(grid) * n**k * float(Fraction(q) ** (-M * k))


def convolve_grids(a: np.ndarray, b: np.ndarray, q: int, r: int) -> np.ndarray:
    """Circular (= exact group) convolution of two spatial grids."""
    k = a.ndim
    prod = np.fft.ifftn(np.fft.fftn(a) * np.fft.fftn(b))
    return prod * float(Fraction(q) ** (-r * k))


def grid_l2_norm(grid: np.ndarray, q: int, r: int) -> float:
    k = grid.ndim
    cell = float(Fraction(q) ** (-r * k))
    return float(np.sqrt((np.abs(grid) ** 2).sum() * cell))


def grid_point(q: int, k: int, M: int, index: tuple[int, ...]) -> QVector:
    """The q-adic point encoded by a spatial grid index."""
    return QVector([QRational(q, int(u), -M) for u in index])


def freq_grid_point(q: int, k: int, r: int, index: tuple[int, ...]) -> QVector:
    """The q-adic point encoded by a frequency grid index."""
    return QVector([QRational(q, int(s), -r) for s in index])
