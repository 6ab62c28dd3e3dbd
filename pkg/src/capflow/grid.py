"""Periodic grid discretization and spectral Bessel-type kernels.

A Grid is a periodic lattice discretization of the plane or the line with
cell measure h^n.  Kernels are built by sampling the symbol
(1 + |xi|^2)^(-alpha/2) at the discrete frequencies 2*pi*k/L and applying the
inverse discrete Fourier transform.  That discrete-periodic kernel is the
model kernel: monotonicity and subadditivity of the induced capacity are
exact for it, and fidelity to the continuum is a separate convergence
diagnostic.

Negative ringing of the inverse transform is clipped to zero (capacity
theory needs a nonnegative kernel); the clipped mass is recorded and grids
whose clipped mass exceeds CLIP_TOLERANCE of the total are rejected as too
coarse for the requested alpha.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from .measure import Field

__all__ = [
    "Grid",
    "KernelSpec",
    "make_grid",
    "bessel_kernel",
    "convolve",
    "CLIP_TOLERANCE",
]

CLIP_TOLERANCE = 1e-6

# wrap-around suppression: box must exceed data diameter by this margin
DECAY_MARGIN = 8.0


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


class Grid:
    """Periodic lattice on a centered box [-L/2, L/2)^n, n in {1, 2}.

    Cell centers along each axis sit at x_j = (j + 1/2) h - L/2 with
    h = L/N.  Fields on the grid are stored flat in row-major order.
    """

    def __init__(self, n: int, L: float, N: int):
        if n not in (1, 2):
            raise ValueError(f"grid dimension must be 1 or 2, got {n}")
        if not (L > 0.0 and math.isfinite(L)):
            raise ValueError(f"side length must be positive and finite, got {L}")
        if not _is_power_of_two(N):
            raise ValueError(f"points per axis must be a power of two, got {N}")
        if N < 8:
            raise ValueError(f"need at least 8 points per axis, got {N}")
        h = L / N
        if h > 0.25:
            raise ValueError(
                f"spacing h={h:.4g} exceeds 1/4; unit-radius balls unresolvable")
        self.n = n
        self.L = float(L)
        self.N = int(N)
        self.h = h
        self.periodic = True
        self._weights = np.full(self.size, self.cell_measure)
        self._weights.setflags(write=False)

    @property
    def size(self) -> int:
        return self.N ** self.n

    @property
    def cell_measure(self) -> float:
        return self.h ** self.n

    @property
    def total_mass(self) -> float:
        return self.L ** self.n

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.n

    def axis_coords(self) -> np.ndarray:
        """Cell-center coordinates along one axis."""
        return (np.arange(self.N) + 0.5) * self.h - self.L / 2.0

    def coords(self) -> np.ndarray:
        """(size, n) array of cell-center coordinates, row-major."""
        x = self.axis_coords()
        if self.n == 1:
            return x[:, None]
        X, Y = np.meshgrid(x, x, indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])

    def radius(self) -> np.ndarray:
        """|x| at every cell center (flat)."""
        c = self.coords()
        return np.sqrt((c ** 2).sum(axis=1))

    def check_support_margin(self, support_diameter: float) -> None:
        """Box must exceed the data diameter by the decay margin."""
        if self.L < support_diameter + DECAY_MARGIN:
            raise ValueError(
                f"box L={self.L} too small for support diameter "
                f"{support_diameter:.3g} plus decay margin {DECAY_MARGIN}")

    def __repr__(self) -> str:
        return f"Grid(n={self.n}, L={self.L}, N={self.N}, h={self.h:.4g})"


def make_grid(n: int, L: float, N: int) -> Grid:
    """Validated periodic grid (see Grid for the constraints)."""
    return Grid(n, L, N)


# ---------------------------------------------------------------------------
# Kernel construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelSpec:
    """Realized nonnegative convolution kernel with its spectral provenance.

    `kernel` is the displacement table g(x_j - x_m) indexed like an FFT
    (entry 0 = zero displacement).  `transfer` is the cell-measure-scaled
    transform used by convolve; its zero-frequency entry is exactly 1 after
    the post-clip renormalization, so the kernel has unit total mass.
    """

    grid: Grid
    alpha: float
    symbol: np.ndarray = field(repr=False)
    kernel: np.ndarray = field(repr=False)
    transfer: np.ndarray = field(repr=False)
    clipped_mass: float = 0.0

    def kernel_field(self) -> Field:
        return Field(self.grid, self.kernel.ravel())


_kernel_cache: dict = {}
_kernel_lock = threading.Lock()


def _frequency_grid(grid: Grid) -> np.ndarray:
    xi = 2.0 * np.pi * np.fft.fftfreq(grid.N, d=grid.h)
    if grid.n == 1:
        return xi ** 2
    return xi[:, None] ** 2 + xi[None, :] ** 2


def bessel_kernel(grid: Grid, alpha: float) -> KernelSpec:
    """Kernel with symbol (1 + |xi|^2)^(-alpha/2) on the grid frequencies.

    The inverse transform is clipped at zero and renormalized to unit mass;
    the clipped mass (relative to the total) is recorded and must stay below
    CLIP_TOLERANCE, otherwise the grid is rejected as too coarse.  The
    realized kernel is even by construction (real even symbol), so the
    induced convolution is symmetric in the integral pairing.

    Construction is cached per (grid geometry, alpha); concurrent readers
    are safe and the lock enforces a single construction per key.
    """
    if not (0.0 < alpha <= grid.n):
        raise ValueError(f"alpha must lie in (0, n]={grid.n}, got {alpha}")
    key = (grid.n, grid.L, grid.N, float(alpha))
    with _kernel_lock:
        spec = _kernel_cache.get(key)
        if spec is not None:
            return spec
        sym = (1.0 + _frequency_grid(grid)) ** (-alpha / 2.0)
        raw = np.fft.ifftn(sym).real / grid.cell_measure
        negative = raw[raw < 0.0]
        clipped = float(-negative.sum() * grid.cell_measure)  # total mass is 1
        if clipped > CLIP_TOLERANCE:
            raise ValueError(
                f"grid too coarse for alpha={alpha}: clipped kernel mass "
                f"{clipped:.3e} exceeds {CLIP_TOLERANCE:.0e}")
        ker = np.clip(raw, 0.0, None)
        ker /= ker.sum() * grid.cell_measure
        transfer = np.fft.fftn(ker).real * grid.cell_measure  # even => real
        ker.setflags(write=False)
        transfer.setflags(write=False)
        sym.setflags(write=False)
        spec = KernelSpec(grid=grid, alpha=float(alpha), symbol=sym,
                          kernel=ker, transfer=transfer, clipped_mass=clipped)
        _kernel_cache[key] = spec
        return spec


def convolve(grid: Grid, kernel: KernelSpec, f: Field) -> Field:
    """Periodic convolution through the transform domain.

    Scaled by the cell measure, so convolving the all-ones field returns the
    kernel mass 1.  Nonnegative inputs stay nonnegative up to transform
    roundoff; values above -1e-12 (relative) are clipped to zero.
    """
    # kernels are cached by geometry, so compare by value, not identity
    if (kernel.grid.n, kernel.grid.L, kernel.grid.N) != (grid.n, grid.L, grid.N):
        raise ValueError("kernel was built for a different grid")
    if f.space is not grid:
        raise ValueError("field lives on a different grid")
    out = _convolve_values(grid, kernel, f.values)
    return Field(grid, out)


def _convolve_values(grid: Grid, kernel: KernelSpec, values: np.ndarray) -> np.ndarray:
    v = values.reshape(grid.shape)
    out = np.fft.ifftn(np.fft.fftn(v) * kernel.transfer).real.ravel()
    if np.all(values >= 0.0):
        scale = float(np.abs(out).max()) or 1.0
        floor = -1e-12 * scale
        tiny = (out < 0.0) & (out >= floor)
        if tiny.any():
            out[tiny] = 0.0
    return out
