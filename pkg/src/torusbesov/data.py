"""Construction of the norm-inflation initial data.

The seed profile is the odd square wave on the torus (1/2 on (0, pi),
-1/2 on (-pi, 0)); only its exact Fourier coefficients

    h_hat(xi) = -2i / xi   for odd xi,   0 for even xi

are ever used, so the jump discontinuities never meet a sampling grid.
The construction low-passes the square wave with a plateau cutoff,
modulates it onto a high carrier 2^n and scales:

    ch datum       amp * cos(2^n x) * (1 + eps * f_n),
                   amp = 2^-n n^{-2/5} log n,  eps = n^{-1/5}
    novikov datum  amp * cos(2^n x) * (1 + eps * f_n) + shift,
                   amp = 2^-n n^{-1/4} log n,  eps = shift = n^{-1/4}

where f_n is the low-pass cutoff of the square wave at order n/2.
The grid must satisfy N >= 2^{n+3} so that every product formed from a
datum stays alias-free under the dealiasing rules and the sampled sup
norms oversample all band-limited envelopes by at least 4x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .blocks import BumpProfile, DEFAULT_PROFILE, FrequencyBand, restricted_norm
from .spectral import (
    DealiasRule,
    GridFunction,
    Spectrum,
    TorusGrid,
    UnderResolvedGridError,
    dealiased_product,
    derivative,
    full_from_half,
    inverse,
    transform,
)

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class SquareWave:
    """Exact square-wave coefficients up to a frequency cutoff."""

    cutoff: int

    def __post_init__(self) -> None:
        if self.cutoff < 1:
            raise ValueError("cutoff must be >= 1")

    def coeff(self, xi) -> np.ndarray:
        xi = np.asarray(xi)
        odd = (np.abs(xi) % 2 == 1) & (np.abs(xi) <= self.cutoff)
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.where(odd, -2.0j / np.where(xi == 0, 1, xi), 0.0 + 0.0j)
        return vals

    def on_grid(self, grid: TorusGrid) -> Spectrum:
        """Realize the coefficients on a grid (cutoff must fit below Nyquist)."""
        if self.cutoff >= grid.nyquist:
            raise UnderResolvedGridError(
                f"square-wave cutoff {self.cutoff} does not fit below Nyquist "
                f"{grid.nyquist} of a size-{grid.size} grid"
            )
        half = np.arange(grid.nyquist + 1)
        return Spectrum(grid, full_from_half(self.coeff(half), grid.size))


def square_wave_spectrum(cutoff: int) -> SquareWave:
    return SquareWave(cutoff)


def _check_band_parameter(n: int) -> None:
    if n < 8 or n % 8 != 0:
        raise ValueError(f"construction parameter must be a positive multiple of 8, got {n}")


def f_n_spectrum(n: int, grid: TorusGrid, profile: BumpProfile = DEFAULT_PROFILE) -> Spectrum:
    """Exact coefficients of the low-frequency part of the square wave."""
    _check_band_parameter(n)
    top = (4.0 / 3.0) * 2.0 ** (n // 2)
    if top >= grid.nyquist:
        raise UnderResolvedGridError(
            f"grid of size {grid.size} cannot resolve the cutoff band (top {top:.0f})"
        )
    wave = square_wave_spectrum(int(top)).on_grid(grid)
    xi = grid.wavenumbers().astype(np.float64)
    mask = profile.chi(xi / float(2 ** (n // 2)))
    return Spectrum(grid, wave.coeffs * mask)


def f_n(n: int, grid: TorusGrid, profile: BumpProfile = DEFAULT_PROFILE) -> GridFunction:
    """Low-frequency part of the square wave: plateau cutoff of order n/2."""
    return inverse(f_n_spectrum(n, grid, profile))


@dataclass(frozen=True)
class InflationDatum:
    """A constructed initial state together with its bookkeeping."""

    n: int
    equation: str  # "ch" | "novikov"
    u0: GridFunction
    u0_spectrum: Spectrum = field(repr=False)
    band: FrequencyBand
    amplitude: float  # scale of the modulated carrier
    modulation_eps: float  # weight of the low-frequency envelope
    mean_shift: float  # constant offset (novikov only)

    @property
    def grid(self) -> TorusGrid:
        return self.u0.grid


def _require_resolution(n: int, grid: TorusGrid) -> None:
    if grid.size < 2 ** (n + 3):
        raise UnderResolvedGridError(
            f"datum with carrier 2^{n} needs a grid of at least 2^{n + 3} points, "
            f"got {grid.size}"
        )


def _modulated_spectrum(
    envelope: Spectrum, carrier: int, amplitude: float, mean_shift: float
) -> Spectrum:
    """amplitude * cos(carrier x) * envelope + mean_shift, assembled in
    coefficient space by shifting the envelope coefficients to +-carrier."""
    grid = envelope.grid
    n_pts = grid.size
    coeffs = np.zeros(n_pts, dtype=np.complex128)
    env = envelope.coeffs
    idx = np.nonzero(np.abs(env) > 0.0)[0]
    etas = grid.wavenumbers()[idx]
    vals = 0.5 * amplitude * env[idx]
    np.add.at(coeffs, (etas + carrier) % n_pts, vals)
    np.add.at(coeffs, (etas - carrier) % n_pts, vals)
    coeffs[0] += TWO_PI * mean_shift
    return Spectrum(grid, coeffs)


def _build_datum(
    n: int,
    grid: TorusGrid,
    profile: BumpProfile,
    equation: str,
    amplitude: float,
    eps: float,
    mean_shift: float,
) -> InflationDatum:
    _check_band_parameter(n)
    _require_resolution(n, grid)
    # envelope 1 + eps f_n assembled in coefficient space: exact sparse support
    fn_hat = f_n_spectrum(n, grid, profile)
    env_coeffs = eps * fn_hat.coeffs
    env_coeffs[0] += TWO_PI
    envelope = Spectrum(grid, env_coeffs)
    spectrum = _modulated_spectrum(envelope, 2**n, amplitude, mean_shift)
    return InflationDatum(
        n=n,
        equation=equation,
        u0=inverse(spectrum),
        u0_spectrum=spectrum,
        band=FrequencyBand(n),
        amplitude=amplitude,
        modulation_eps=eps,
        mean_shift=mean_shift,
    )


def ch_datum(n: int, grid: TorusGrid, profile: BumpProfile = DEFAULT_PROFILE) -> InflationDatum:
    amplitude = 2.0 ** (-n) * n ** (-0.4) * math.log(n)
    return _build_datum(n, grid, profile, "ch", amplitude, n ** (-0.2), 0.0)


def novikov_datum(
    n: int, grid: TorusGrid, profile: BumpProfile = DEFAULT_PROFILE
) -> InflationDatum:
    amplitude = 2.0 ** (-n) * n ** (-0.25) * math.log(n)
    return _build_datum(n, grid, profile, "novikov", amplitude, n ** (-0.25), n ** (-0.25))


def ch_datum_derivative(
    n: int, grid: TorusGrid, profile: BumpProfile = DEFAULT_PROFILE
) -> GridFunction:
    """Closed-form slope of the ch datum, assembled from f_n and its derivative.

    Agrees with the spectral derivative of the datum to roundoff; keeping
    both assembly routes makes each one an oracle for the other.
    """
    _check_band_parameter(n)
    _require_resolution(n, grid)
    scale = n ** (-0.4) * math.log(n)
    eps = n ** (-0.2)
    fn = f_n(n, grid, profile)
    fn_dx = inverse(derivative(transform(fn)))
    x = grid.points
    carrier = 2**n
    samples = -scale * (
        np.sin(carrier * x) * (1.0 + eps * fn.samples)
        - 2.0 ** (-n) * eps * np.cos(carrier * x) * fn_dx.samples
    )
    return GridFunction(grid, samples)


def datum_derivative(datum: InflationDatum) -> GridFunction:
    """Spectral slope of a datum."""
    return inverse(derivative(datum.u0_spectrum))


def slope_square_band_norm(
    datum: InflationDatum, profile: BumpProfile = DEFAULT_PROFILE
) -> float:
    """Band-restricted flat norm of the squared slope of the ch datum."""
    if datum.equation != "ch":
        raise ValueError("squared-slope band quantity is defined for the ch datum")
    ux = datum_derivative(datum)
    square = dealiased_product(ux, ux, DealiasRule.QUADRATIC)
    return restricted_norm(square, 0, datum.band, profile)


def novikov_cubic_band_norm(
    datum: InflationDatum, profile: BumpProfile = DEFAULT_PROFILE
) -> float:
    """Band-restricted flat norm of u (du/dx)^2 for the novikov datum."""
    if datum.equation != "novikov":
        raise ValueError("cubic band quantity is defined for the novikov datum")
    ux = datum_derivative(datum)
    square = dealiased_product(ux, ux, DealiasRule.CUBIC)
    cubic = dealiased_product(datum.u0, square, DealiasRule.CUBIC)
    return restricted_norm(cubic, 0, datum.band, profile)


def datum_grid_size(n: int) -> int:
    """Smallest grid satisfying the resolution rule for carrier 2^n."""
    return 2 ** (n + 3)
