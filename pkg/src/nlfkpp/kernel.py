"""Top-hat convolution ``(phi*u)(x) = int_{x-1/2}^{x+1/2} u(y) dy`` on uniform grids.

Two variants are provided:

* :func:`convolve_trapezium` integrates the piecewise-linear interpolant of
  the nodal values exactly (the trapezium rule with the two fractional end
  cells handled by linear interpolation).  Values outside the grid are zero.
* :func:`convolve_periodic` is a circular convolution evaluated with the FFT
  using the exact Fourier coefficients of the indicator function.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

HALF_WIDTH = 0.5


class Representation(Enum):
    U = "u"
    LOG_U = "log_u"


@dataclass(frozen=True)
class TopHatKernel:
    half_width: float = field(default=HALF_WIDTH, init=False)


TOP_HAT = TopHatKernel()


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid ``x_i = x_left + i*dx``, ``i = 0..n-1``.

    A periodic grid covers exactly one period ``n*dx`` without repeating the
    endpoint.
    """

    x_left: float
    dx: float
    n: int
    periodic: bool = False

    def __post_init__(self):
        if not self.dx > 0:
            raise ValueError(f"grid spacing must be positive, got {self.dx}")
        if self.n < 3:
            raise ValueError(f"grid needs at least 3 nodes, got {self.n}")

    @classmethod
    def spanning(cls, a: float, b: float, n: int) -> "Grid1D":
        """Non-periodic grid with nodes at both ``a`` and ``b``."""
        return cls(a, (b - a) / (n - 1), n, periodic=False)

    @classmethod
    def periodic_of(cls, length: float, n: int, centred: bool = True) -> "Grid1D":
        x0 = -0.5 * length if centred else 0.0
        return cls(x0, length / n, n, periodic=True)

    @property
    def x(self) -> np.ndarray:
        return self.x_left + self.dx * np.arange(self.n)

    @property
    def length(self) -> float:
        """Period for periodic grids, node span otherwise."""
        return self.n * self.dx if self.periodic else (self.n - 1) * self.dx


@dataclass
class Field:
    grid: Grid1D
    values: np.ndarray
    representation: Representation = Representation.U

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n,):
            raise ValueError(
                f"expected {self.grid.n} values, got shape {self.values.shape}"
            )

    def as_u(self) -> np.ndarray:
        if self.representation is Representation.LOG_U:
            return np.exp(self.values)
        return self.values

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy(), self.representation)


def _tent_cdf(t):
    """Antiderivative of the unit tent ``max(0, 1-|t|)``, zero at -inf."""
    t = np.asarray(t, dtype=float)
    out = np.where((t > -1.0) & (t <= 0.0), 0.5 * (1.0 + t) ** 2, 0.0)
    out = np.where((t > 0.0) & (t < 1.0), 1.0 - 0.5 * (1.0 - t) ** 2, out)
    return np.where(t >= 1.0, 1.0, out)


def window_weights(dx: float, half_width: float = HALF_WIDTH) -> tuple[np.ndarray, int]:
    """Quadrature weights for the window integral of a piecewise-linear function.

    Returns ``(w, m)`` such that ``int_{x_i-h}^{x_i+h} u = sum_k w[k+m] u[i+k]``
    for ``k = -m..m``.  The weights are non-negative and sum to ``2h``.
    """
    a = half_width / dx
    m = int(np.ceil(a)) + 1
    k = np.arange(-m, m + 1)
    w = dx * (_tent_cdf(a - k) - _tent_cdf(-a - k))
    w[np.abs(w) < 1e-300] = 0.0
    return w, m


def convolve_trapezium(f: Field, k: TopHatKernel = TOP_HAT) -> Field:
    """Window integral of a non-periodic field, zero outside the grid."""
    g = f.grid
    if g.periodic:
        raise ValueError("convolve_trapezium needs a non-periodic grid")
    if f.representation is not Representation.U:
        raise ValueError("convolve_trapezium expects a field in U representation")
    if g.length < 2 * k.half_width:
        raise ValueError("grid too small: span is narrower than the kernel support")
    w, _ = window_weights(g.dx, k.half_width)
    out = np.convolve(f.values, w, mode="same")
    return Field(g, out)


def fourier_symbol(n: int, length: float, half_width: float = HALF_WIDTH) -> np.ndarray:
    """Exact Fourier coefficients of the indicator of ``[-h, h]`` on a period ``length``.

    Ordered as the output of :func:`numpy.fft.rfftfreq`; equals
    ``sin(2 pi m h / L) L / (pi m)`` and 1 at ``m = 0`` for ``h = 1/2``.
    """
    m = np.arange(n // 2 + 1)
    arg = 2.0 * np.pi * m * half_width / length
    sym = np.ones_like(arg)
    nz = m > 0
    sym[nz] = np.sin(arg[nz]) * length / (np.pi * m[nz])
    return sym


def convolve_periodic(f: Field, k: TopHatKernel = TOP_HAT,
                      symbol: np.ndarray | None = None) -> Field:
    """Circular window integral via the FFT.

    ``symbol`` may be passed to reuse a precomputed :func:`fourier_symbol`.
    A ``LOG_U`` field is exponentiated first; the result is always ``U``.
    """
    g = f.grid
    if not g.periodic:
        raise ValueError("convolve_periodic needs a periodic grid")
    if g.length < 2 * k.half_width:
        raise ValueError("period shorter than kernel support")
    if symbol is None:
        symbol = fourier_symbol(g.n, g.length, k.half_width)
    u = f.as_u()
    out = np.fft.irfft(np.fft.rfft(u) * symbol, n=g.n)
    return Field(g, out)
