"""Exact periodic Fourier analysis on a uniform grid of the torus [0, 2pi).

Conventions (non-unitary, matching the analytical normalization used
throughout the package):

    forward   u_hat(xi) = (2pi/N) * sum_m u(x_m) exp(-i x_m xi)
    inverse   u(x)      = (1/2pi) * sum_xi u_hat(xi) exp(i x xi)

so that e.g. the transform of cos(lambda * x) equals pi exactly at
xi = +/-lambda.  Coefficients are stored in numpy FFT ordering
(xi = 0, 1, ..., N/2-1, -N/2, ..., -1); the forward quadrature is exact
for band-limited inputs with top frequency below N/2.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi


class TorusBesovError(Exception):
    """Base class for package errors."""


class UnderResolvedGridError(TorusBesovError):
    """The grid cannot represent the requested frequency content."""


class NonHermitianSpectrumError(TorusBesovError):
    """A real-valued result was requested from a non-Hermitian spectrum."""


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class TorusGrid:
    """Uniform grid x_m = 2pi m / N on the torus; N a power of two, N >= 16."""

    size: int

    def __post_init__(self) -> None:
        if not _is_power_of_two(self.size) or self.size < 16:
            raise ValueError(f"grid size must be a power of two >= 16, got {self.size}")

    @property
    def points(self) -> np.ndarray:
        return TWO_PI * np.arange(self.size) / self.size

    @property
    def spacing(self) -> float:
        return TWO_PI / self.size

    @property
    def nyquist(self) -> int:
        return self.size // 2

    def wavenumbers(self) -> np.ndarray:
        """Integer wavenumbers in FFT order: 0..N/2-1, -N/2..-1."""
        return np.fft.fftfreq(self.size, d=1.0 / self.size).astype(np.int64)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real samples of a 2pi-periodic function on a TorusGrid."""

    grid: TorusGrid
    samples: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if samples.shape != (self.grid.size,):
            raise ValueError(
                f"expected {self.grid.size} samples, got shape {samples.shape}"
            )
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def lp_norm(self, p: float) -> float:
        """L^p norm by uniform quadrature (weight 2pi/N); p = inf gives max."""
        if np.isinf(p):
            return self.sup_norm()
        if p < 1:
            raise ValueError(f"p must be in [1, inf], got {p}")
        w = self.grid.spacing
        return float((w * np.sum(np.abs(self.samples) ** p)) ** (1.0 / p))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Fourier coefficients u_hat(xi) for xi in [-N/2, N/2), FFT ordering."""

    grid: TorusGrid
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        object.__setattr__(self, "coeffs", coeffs)
        if coeffs.shape != (self.grid.size,):
            raise ValueError(
                f"expected {self.grid.size} coefficients, got shape {coeffs.shape}"
            )
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")

    def coeff(self, xi: int) -> complex:
        n = self.grid.size
        if not -n // 2 <= xi < n // 2:
            raise ValueError(f"wavenumber {xi} outside [-{n // 2}, {n // 2})")
        return complex(self.coeffs[xi % n])

    def wavenumbers(self) -> np.ndarray:
        return self.grid.wavenumbers()

    def hermitian_defect(self) -> float:
        """Max |u_hat(-xi) - conj(u_hat(xi))|; zero for spectra of real functions."""
        c = self.coeffs
        defect = np.max(np.abs(c[1:] - np.conj(c[-1:0:-1])))
        # The Nyquist bin pairs with itself: Hermitian symmetry forces it real.
        defect = max(float(defect), float(abs(c[self.grid.size // 2].imag)) * 2.0)
        return float(defect)


class DealiasRule(enum.Enum):
    """Retention rule for pointwise products.

    QUADRATIC keeps |xi| <= floor(N/3) (the 2/3 rule), alias-free for
    binary products of inputs band-limited to the retained band.
    CUBIC keeps |xi| <= N/4 (the 1/2 rule), sized so that triple products
    of retained-band inputs stay alias-free on the retained modes.
    """

    QUADRATIC = "quadratic"
    CUBIC = "cubic"

    def cutoff(self, grid_size: int) -> int:
        if self is DealiasRule.QUADRATIC:
            return grid_size // 3
        return grid_size // 4


def full_from_half(half: np.ndarray, n: int) -> np.ndarray:
    """Expand rfft-layout coefficients to full FFT layout, exactly Hermitian."""
    coeffs = np.empty(n, dtype=np.complex128)
    coeffs[: n // 2 + 1] = half
    coeffs[n // 2] = half[n // 2].real  # Nyquist bin is its own conjugate pair
    coeffs[n // 2 + 1 :] = np.conj(half[1 : n // 2][::-1])
    return coeffs


def transform(f: GridFunction) -> Spectrum:
    """Forward transform: quadrature realization of the integral convention.

    Computed through the real FFT and mirrored, so the result is exactly
    Hermitian; every multiplier operation downstream preserves that.
    """
    n = f.grid.size
    half = (TWO_PI / n) * np.fft.rfft(f.samples)
    return Spectrum(f.grid, full_from_half(half, n))


def inverse(s: Spectrum, hermitian_tol: float = 1e-12) -> GridFunction:
    """Inverse transform onto the grid; rejects non-Hermitian input.

    Spectra produced by this package are Hermitian to the last bit, so the
    tolerance (relative to the largest coefficient) only catches corrupted
    or hand-built one-sided input.
    """
    scale = float(np.max(np.abs(s.coeffs)))
    if scale > 0.0 and s.hermitian_defect() > hermitian_tol * scale:
        raise NonHermitianSpectrumError(
            f"spectrum is not Hermitian (defect {s.hermitian_defect():.3e}, "
            f"scale {scale:.3e}); cannot produce a real function"
        )
    n = s.grid.size
    samples = (n / TWO_PI) * np.fft.irfft(s.coeffs[: n // 2 + 1], n=n)
    return GridFunction(s.grid, samples)


def derivative(s: Spectrum) -> Spectrum:
    """Spectral d/dx: multiply by i*xi; the Nyquist mode is zeroed."""
    xi = s.grid.wavenumbers().astype(np.float64)
    coeffs = 1j * xi * s.coeffs
    coeffs[s.grid.size // 2] = 0.0
    return Spectrum(s.grid, coeffs)


def helmholtz_inverse(s: Spectrum) -> Spectrum:
    """Inverse Helmholtz operator (1 - d^2/dx^2)^{-1}: multiply by 1/(1+xi^2)."""
    xi = s.grid.wavenumbers().astype(np.float64)
    return Spectrum(s.grid, s.coeffs / (1.0 + xi * xi))


def truncate(s: Spectrum, cutoff: int) -> Spectrum:
    """Zero all modes with |xi| > cutoff."""
    xi = s.grid.wavenumbers()
    coeffs = np.where(np.abs(xi) <= cutoff, s.coeffs, 0.0 + 0.0j)
    return Spectrum(s.grid, coeffs)


def dealiased_product(f: GridFunction, g: GridFunction, rule: DealiasRule) -> GridFunction:
    """Pointwise product with modes above the rule's cutoff zeroed afterwards.

    Equals the exact spectral convolution whenever the combined input
    bandwidth stays below the retained band (and is alias-free on the
    retained modes whenever both inputs are themselves retained-band
    limited).
    """
    if f.grid.size != g.grid.size:
        raise ValueError("operands must share a grid")
    product = GridFunction(f.grid, f.samples * g.samples)
    cutoff = rule.cutoff(f.grid.size)
    return inverse(truncate(transform(product), cutoff))


def parseval_mismatch(f: GridFunction) -> float:
    """Relative gap between (1/2pi) sum |u_hat|^2 and (2pi/N) sum |u|^2."""
    s = transform(f)
    lhs = float(np.sum(np.abs(s.coeffs) ** 2)) / TWO_PI
    rhs = float(np.sum(f.samples**2)) * TWO_PI / f.grid.size
    denom = max(abs(lhs), abs(rhs), 1e-300)
    return abs(lhs - rhs) / denom
