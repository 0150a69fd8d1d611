"""Periodic spectral substrate: grid, Fourier differentiation, Helmholtz
operator, quadrature and Sobolev norms.

Everything downstream works on a uniform periodic box [-L/2, L/2) that
truncates the real line; box sizes are chosen so the data decays below
round-off at the boundary.  The Helmholtz operator 1 - d^2/dx^2 and its
inverse (convolution with exp(-|x|)/2 on the line) are exact Fourier
multipliers 1 + w_k^2 and 1/(1 + w_k^2), w_k = 2*pi*k/L.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class NonFiniteFieldError(ValueError):
    """Raised when an operation receives a blown-up (NaN/Inf) field."""


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform periodic grid with n points on a box of size length.

    Sample points are x_j = -length/2 + j*dx, j = 0..n-1, dx = length/n.
    n must be a power of two >= 16 so FFT sizes stay fast and halving/
    doubling in refinement studies is exact.
    """

    length: float
    n: int

    def __post_init__(self):
        if not (self.length > 0):
            raise ValueError(f"box length must be positive, got {self.length}")
        if self.n < 16 or (self.n & (self.n - 1)) != 0:
            raise ValueError(f"n must be a power of two >= 16, got {self.n}")

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def x(self) -> np.ndarray:
        return -0.5 * self.length + self.dx * np.arange(self.n)

    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers w_k = 2*pi*k/L for the rfft layout."""
        return 2.0 * np.pi * np.fft.rfftfreq(self.n, d=self.dx)

    def sample(self, fn) -> "GridField":
        """Sample a callable fn(x) on the grid."""
        return GridField(self, np.asarray(fn(self.x), dtype=float))


@dataclass(frozen=True)
class GridField:
    """Real field sampled on a PeriodicGrid.  Values are immutable."""

    grid: PeriodicGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {v.shape}")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def require_finite(self) -> None:
        if not self.is_finite():
            raise NonFiniteFieldError("non-finite field")

    def with_values(self, values: np.ndarray) -> "GridField":
        return GridField(self.grid, values)

    # pointwise algebra; combining fields from different grids is a bug
    def _coerce(self, other):
        if isinstance(other, GridField):
            if other.grid != self.grid:
                raise ValueError("grid mismatch")
            return other.values
        return other

    def __add__(self, other):
        return self.with_values(self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self.with_values(self.values - self._coerce(other))

    def __rsub__(self, other):
        return self.with_values(self._coerce(other) - self.values)

    def __mul__(self, other):
        return self.with_values(self.values * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)


def _multiplier_apply(f: GridField, symbol: np.ndarray) -> GridField:
    f.require_finite()
    fhat = np.fft.rfft(f.values)
    return f.with_values(np.fft.irfft(symbol * fhat, n=f.grid.n))


def spectral_derivative(f: GridField, order: int = 1) -> GridField:
    """order-th spatial derivative via the Fourier symbol (i*w_k)^order.

    Odd-order derivatives zero the Nyquist mode (standard real-field
    convention; keeps the result real).
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    w = f.grid.wavenumbers()
    symbol = (1j * w) ** order
    if order % 2 == 1:
        symbol[-1] = 0.0  # Nyquist
    return _multiplier_apply(f, symbol)


def helmholtz_apply(f: GridField) -> GridField:
    """(1 - d^2/dx^2) f, i.e. mode k multiplied by 1 + w_k^2."""
    w = f.grid.wavenumbers()
    return _multiplier_apply(f, 1.0 + w * w)


def helmholtz_inverse(f: GridField) -> GridField:
    """(1 - d^2/dx^2)^{-1} f: mode k multiplied by 1/(1 + w_k^2).

    Equals convolution with the periodicized kernel exp(-|x|)/2.
    """
    w = f.grid.wavenumbers()
    return _multiplier_apply(f, 1.0 / (1.0 + w * w))


def dealias_filter(f: GridField) -> GridField:
    """Zero the top third of the spectrum (2/3-rule anti-aliasing mask)."""
    w = f.grid.wavenumbers()
    n = f.grid.n
    cutoff = n // 3
    mask = (np.arange(w.size) <= cutoff).astype(float)
    return _multiplier_apply(f, mask)


def quadrature(f: GridField) -> float:
    """Integral of f over the box: dx * sum of samples.

    On a periodic grid the rectangle rule is the trapezoid rule and is
    spectrally accurate for smooth periodic integrands.
    """
    f.require_finite()
    return float(f.grid.dx * np.sum(f.values))


def sobolev_norm(f: GridField, s: float = 0.0) -> float:
    """H^s norm with multiplier (1 + w_k^2)^(s/2).

    Normalized so that integer-s norms coincide with physical-space
    integrals: s=0 gives the L^2 norm sqrt(int f^2), s=1 gives
    sqrt(int f^2 + f_x^2).
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    f.require_finite()
    n = f.grid.n
    fhat = np.fft.rfft(f.values)
    w = f.grid.wavenumbers()
    # rfft halves the spectrum: double-count interior bins, not DC/Nyquist
    weight = np.full(w.size, 2.0)
    weight[0] = 1.0
    if n % 2 == 0:
        weight[-1] = 1.0
    power = weight * (1.0 + w * w) ** s * np.abs(fhat) ** 2
    return float(np.sqrt(f.grid.length * np.sum(power) / n**2))
