"""Square wave, low-pass envelope, and the two inflation data families.

The square-wave coefficients are verified against a composite-Simpson
quadrature of the piecewise-constant profile; everything downstream is
checked for support, symmetry, scaling and two-route agreement.
"""

import math

import numpy as np
import pytest

from torusbesov.blocks import (
    BesovSpec,
    FrequencyBand,
    besov_norm,
    block,
    max_block_index,
    restricted_norm,
)
from torusbesov.data import (
    ch_datum,
    ch_datum_derivative,
    datum_derivative,
    f_n,
    novikov_cubic_band_norm,
    novikov_datum,
    slope_square_band_norm,
    square_wave_spectrum,
)
from torusbesov.spectral import (
    DealiasRule,
    GridFunction,
    TorusGrid,
    UnderResolvedGridError,
    dealiased_product,
    derivative,
    inverse,
    transform,
)

TWO_PI = 2.0 * np.pi


def simpson_quadrature_coefficient(xi: int, pieces: int = 2**14) -> complex:
    """Oracle: integrate the piecewise square wave against exp(-i xi x).

    Composite Simpson on (0, pi) and (pi, 2pi) separately, where the wave
    is +1/2 and -1/2; the integrand is smooth on each piece.
    """
    total = 0.0 + 0.0j
    for a, b, val in ((0.0, np.pi, 0.5), (np.pi, TWO_PI, -0.5)):
        xs = np.linspace(a, b, 2 * pieces + 1)
        ys = val * np.exp(-1j * xi * xs)
        h = (b - a) / (2 * pieces)
        total += h / 3.0 * (ys[0] + ys[-1] + 4 * ys[1::2].sum() + 2 * ys[2:-1:2].sum())
    return total


@pytest.mark.parametrize(
    "xi,expected",
    [(1, -2j), (2, 0.0), (-3, 2j / 3), (5, -2j / 5), (8, 0.0)],
)
def test_square_wave_coefficients(xi, expected):
    wave = square_wave_spectrum(64)
    got = complex(wave.coeff(np.array([xi]))[0])
    assert abs(got - expected) <= 1e-14
    oracle = simpson_quadrature_coefficient(xi)
    assert abs(got - oracle) <= 1e-10


def test_square_wave_coefficients_match_quadrature_range():
    wave = square_wave_spectrum(33)
    for xi in range(-33, 34):
        got = complex(wave.coeff(np.array([xi]))[0])
        assert abs(got - simpson_quadrature_coefficient(xi)) <= 1e-10


def test_square_wave_respects_cutoff():
    wave = square_wave_spectrum(9)
    assert abs(wave.coeff(np.array([11]))[0]) == 0.0


# ---------------------------------------------------------------------------
# f_n
# ---------------------------------------------------------------------------


def test_f_n_is_odd():
    grid = TorusGrid(2**9)
    fn = f_n(8, grid)
    s = fn.samples
    assert abs(s[0]) <= 1e-12
    assert np.max(np.abs(s[1:] + s[1:][::-1])) <= 1e-12


def test_f_n_sup_uniformly_bounded():
    sups = []
    for n, size in ((8, 2**9), (16, 2**12), (24, 2**15)):
        fn = f_n(n, TorusGrid(size))
        sups.append(fn.sup_norm())
    sups = np.array(sups)
    assert np.all(sups >= 0.4) and np.all(sups <= 0.7)
    assert sups.max() / sups.min() <= 1.5


def test_f_n_band_norm_scales_like_n():
    ratios = []
    for n, size in ((8, 2**9), (16, 2**12), (24, 2**15)):
        fn = f_n(n, TorusGrid(size))
        ratios.append(restricted_norm(fn, 0, FrequencyBand(n)) / n)
    ratios = np.array(ratios)
    assert np.all(ratios > 0)
    assert ratios.max() / ratios.min() <= 4.0


def test_f_n_under_resolved():
    with pytest.raises(UnderResolvedGridError):
        f_n(16, TorusGrid(2**8))


def test_f_n_blocks_match_square_wave_blocks_on_band():
    # the plateau cutoff is 1 on every band annulus, so blocks agree with
    # blocks of the (much wider) truncated square wave
    n = 16
    grid = TorusGrid(2**12)
    fn = f_n(n, grid)
    wave = inverse(square_wave_spectrum(grid.nyquist - 1).on_grid(grid))
    for j in FrequencyBand(n).js:
        a = block(fn, j)
        b = block(wave, j)
        assert np.max(np.abs(a.samples - b.samples)) <= 1e-12


# ---------------------------------------------------------------------------
# ch datum
# ---------------------------------------------------------------------------


def test_ch_datum_sup_scaling():
    for n, size in ((8, 2**11), (16, 2**19)):
        datum = ch_datum(n, TorusGrid(size))
        bound = 2.0 ** (-n) * n ** (-0.4) * math.log(n)
        assert datum.u0.sup_norm() <= 2.0 * bound
        assert datum.u0.sup_norm() >= 0.5 * bound


def test_ch_datum_block_support():
    n = 8
    datum = ch_datum(n, TorusGrid(2**11))
    scale = datum.u0.sup_norm()
    for j in range(-1, max_block_index(datum.grid) + 1):
        if j in (n - 1, n, n + 1):
            continue
        assert block(datum.u0, j).sup_norm() <= 1e-12 * scale, f"block {j}"


def test_ch_datum_top_frequency():
    n = 8
    datum = ch_datum(n, TorusGrid(2**11))
    mags = np.abs(datum.u0_spectrum.coeffs)
    xi = np.abs(datum.grid.wavenumbers())
    top = int(xi[mags > 0].max())
    assert top <= 2**n + int(4 / 3 * 2 ** (n // 2))
    assert top < datum.grid.nyquist


def test_ch_datum_requires_resolution():
    with pytest.raises(UnderResolvedGridError):
        ch_datum(8, TorusGrid(2**10))


def test_ch_derivative_two_routes_agree():
    for n, size in ((8, 2**11), (16, 2**19)):
        grid = TorusGrid(size)
        closed = ch_datum_derivative(n, grid)
        spectral = datum_derivative(ch_datum(n, grid))
        scale = spectral.sup_norm()
        assert np.max(np.abs(closed.samples - spectral.samples)) <= 1e-10 * scale


def test_ch_derivative_sup_scaling():
    for n, size in ((8, 2**11), (16, 2**19)):
        ux = ch_datum_derivative(n, TorusGrid(size))
        ratio = ux.sup_norm() / (n ** (-0.4) * math.log(n))
        assert 0.5 <= ratio <= 3.0


def test_single_mode_derivative():
    # degenerate envelope: the slope of a pure carrier is exactly the
    # rotated carrier at carrier scale
    grid = TorusGrid(2**11)
    n = 8
    amp = 2.0 ** (-n) * n ** (-0.4) * math.log(n)
    f = GridFunction(grid, amp * np.cos(2**n * grid.points))
    d = inverse(derivative(transform(f)))
    expected = -amp * 2**n * np.sin(2**n * grid.points)
    assert np.max(np.abs(d.samples - expected)) <= 1e-12 * amp * 2**n


def test_ch_datum_besov_norm_ratio():
    for n, size in ((8, 2**11), (16, 2**19)):
        datum = ch_datum(n, TorusGrid(size))
        ratio = besov_norm(datum.u0, BesovSpec(1.0, np.inf, 1)) / (n ** (-0.4) * math.log(n))
        assert 0.05 <= ratio <= 20.0


# ---------------------------------------------------------------------------
# novikov datum
# ---------------------------------------------------------------------------


def test_novikov_mean_is_shift():
    n = 8
    datum = novikov_datum(n, TorusGrid(2**11))
    mean = datum.u0_spectrum.coeff(0).real / TWO_PI
    assert abs(mean - n ** (-0.25)) <= 1e-14
    assert abs(np.mean(datum.u0.samples) - n ** (-0.25)) <= 1e-13


def test_novikov_block_support_without_mean():
    n = 8
    datum = novikov_datum(n, TorusGrid(2**11))
    shifted = GridFunction(datum.grid, datum.u0.samples - n ** (-0.25))
    scale = shifted.sup_norm()
    for j in range(-1, max_block_index(datum.grid) + 1):
        if j in (n - 1, n, n + 1):
            continue
        assert block(shifted, j).sup_norm() <= 1e-11 * scale, f"block {j}"


def test_novikov_besov_ratio():
    for n, size in ((8, 2**11), (16, 2**19)):
        datum = novikov_datum(n, TorusGrid(size))
        ratio = besov_norm(datum.u0, BesovSpec(1.0, np.inf, 1)) / (n ** (-0.25) * math.log(n))
        assert 0.05 <= ratio <= 20.0


# ---------------------------------------------------------------------------
# band quantities
# ---------------------------------------------------------------------------


def test_slope_square_band_norm_positive_and_stable():
    vals = {}
    for n, size in ((8, 2**11), (16, 2**19)):
        datum = ch_datum(n, TorusGrid(size))
        vals[n] = slope_square_band_norm(datum) / math.log(n) ** 2
    assert all(v > 0 for v in vals.values())
    ratio = max(vals.values()) / min(vals.values())
    assert ratio <= 4.0


def test_interference_term_annihilates_on_band():
    # the cross term sin(2^{n+1} x) * f_n' * (1 + eps f_n) lives near the
    # carrier scale, far above the band window
    n = 8
    grid = TorusGrid(2**11)
    fn = f_n(n, grid)
    fn_dx = inverse(derivative(transform(fn)))
    eps = n ** (-0.2)
    envelope = GridFunction(grid, fn_dx.samples * (1.0 + eps * fn.samples))
    cross = GridFunction(
        grid,
        2.0 ** (-n) * eps * np.sin(2 ** (n + 1) * grid.points) * envelope.samples,
    )
    scale = max(cross.sup_norm(), 1e-30)
    for j in FrequencyBand(n).js:
        assert block(cross, j).sup_norm() <= 1e-12 * scale


def test_constant_minus_double_carrier_annihilates_on_band():
    n = 8
    grid = TorusGrid(2**11)
    f = GridFunction(grid, 1.0 - np.cos(2 ** (n + 1) * grid.points))
    for j in FrequencyBand(n).js:
        assert block(f, j).sup_norm() <= 1e-13


def test_novikov_band_norm_positive_and_stable():
    vals = {}
    for n, size in ((8, 2**11), (16, 2**19)):
        datum = novikov_datum(n, TorusGrid(size))
        vals[n] = novikov_cubic_band_norm(datum) / math.log(n) ** 2
    assert all(v > 0 for v in vals.values())
    assert max(vals.values()) / min(vals.values()) <= 4.0


def test_pure_carrier_cubic_misses_band():
    n = 8
    grid = TorusGrid(2**11)
    amp = 2.0 ** (-n)
    v = GridFunction(grid, amp * np.cos(2**n * grid.points))
    vx = inverse(derivative(transform(v)))
    square = dealiased_product(vx, vx, DealiasRule.CUBIC)
    cubic = dealiased_product(v, square, DealiasRule.CUBIC)
    assert restricted_norm(cubic, 0, FrequencyBand(n)) <= 1e-12 * cubic.sup_norm()


def test_novikov_band_norm_shift_invariant():
    n = 8
    datum = novikov_datum(n, TorusGrid(2**11))
    rolled = GridFunction(datum.grid, np.roll(datum.u0.samples, 1))
    val = novikov_cubic_band_norm(datum)
    datum_rolled = type(datum)(
        n=datum.n,
        equation=datum.equation,
        u0=rolled,
        u0_spectrum=transform(rolled),
        band=datum.band,
        amplitude=datum.amplitude,
        modulation_eps=datum.modulation_eps,
        mean_shift=datum.mean_shift,
    )
    val_rolled = novikov_cubic_band_norm(datum_rolled)
    assert abs(val - val_rolled) <= 1e-10 * val
