"""Dyadic frequency decomposition on the torus.

A smooth bump chi equals 1 on |xi| <= 3/4 and vanishes for |xi| >= 4/3;
phi(xi) = chi(xi/2) - chi(xi) is the induced annulus bump supported on
3/4 <= |xi| <= 8/3.  The dyadic blocks are the Fourier multipliers

    block j = -1 : chi(xi)
    block j >= 0 : phi(2^-j xi)
    block j <= -2: zero

and the low-frequency cutoff of order j >= 0 is the multiplier
chi(2^-j xi), which equals the sum of all blocks below j exactly
(the chi evaluations telescope without roundoff because scaling an
integer frequency by a power of two is exact in binary floats).

Besov norms weight the block L^p norms by 2^{sj} and take an l^r sum;
the band-restricted variant sums 2^{kj} sup-norms over a window of
block indices only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import (
    DealiasRule,
    GridFunction,
    Spectrum,
    TorusGrid,
    UnderResolvedGridError,
    dealiased_product,
    derivative,
    inverse,
    transform,
)

PLATEAU_RADIUS = 0.75
SUPPORT_RADIUS = 4.0 / 3.0


def _smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity ramp: 0 for t <= 0, 1 for t >= 1, strictly monotone between."""
    t = np.asarray(t, dtype=np.float64)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        g_up = np.where(t > 0.0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
        g_dn = np.where(t < 1.0, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
    return g_up / (g_up + g_dn)


@dataclass(frozen=True)
class BumpProfile:
    """The chi / phi multiplier pair with plateau and support radii."""

    inner: float = PLATEAU_RADIUS
    outer: float = SUPPORT_RADIUS

    def __post_init__(self) -> None:
        if not 0.0 < self.inner < self.outer:
            raise ValueError("need 0 < inner < outer")

    def chi(self, xi) -> np.ndarray:
        xi = np.abs(np.asarray(xi, dtype=np.float64))
        return _smooth_step((self.outer - xi) / (self.outer - self.inner))

    def phi(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=np.float64)
        return self.chi(xi / 2.0) - self.chi(xi)

    def phi_dyadic(self, xi, j: int) -> np.ndarray:
        """phi(2^-j xi), computed as a chi-difference so sums telescope exactly."""
        xi = np.asarray(xi, dtype=np.float64)
        return self.chi(xi / float(2 ** (j + 1))) - self.chi(xi / float(2**j))


DEFAULT_PROFILE = BumpProfile()

# multiplier tables keyed by (inner, outer, N, j); j = -1 stores chi
_MASK_CACHE: dict[tuple[float, float, int, int], np.ndarray] = {}


def block_mask(grid: TorusGrid, j: int, profile: BumpProfile = DEFAULT_PROFILE) -> np.ndarray:
    """Multiplier values of block j on the grid wavenumbers (FFT order)."""
    key = (profile.inner, profile.outer, grid.size, j)
    cached = _MASK_CACHE.get(key)
    if cached is None:
        xi = grid.wavenumbers().astype(np.float64)
        cached = profile.chi(xi) if j == -1 else profile.phi_dyadic(xi, j)
        cached.setflags(write=False)
        _MASK_CACHE[key] = cached
    return cached


def max_block_index(grid: TorusGrid) -> int:
    """Largest j whose annulus meets the representable modes |xi| < N/2."""
    return int(math.log2(grid.size)) - 1


def _check_block_resolved(grid: TorusGrid, j: int) -> None:
    # The annulus of block j starts at (3/4) 2^j; if that already reaches the
    # Nyquist frequency the grid holds no content the block could see.
    if j >= 0 and PLATEAU_RADIUS * 2.0**j >= grid.nyquist:
        raise UnderResolvedGridError(
            f"block {j} lies beyond the grid Nyquist ({grid.nyquist}); "
            f"grid of size {grid.size} is under-resolved"
        )


def block_spectrum(s: Spectrum, j: int, profile: BumpProfile = DEFAULT_PROFILE) -> Spectrum:
    """Block applied in coefficient space."""
    if j <= -2:
        return Spectrum(s.grid, np.zeros(s.grid.size, dtype=np.complex128))
    _check_block_resolved(s.grid, j)
    return Spectrum(s.grid, s.coeffs * block_mask(s.grid, j, profile))


def block(f: GridFunction, j: int, profile: BumpProfile = DEFAULT_PROFILE) -> GridFunction:
    """The j-th dyadic block of f (zero function for j <= -2)."""
    if j <= -2:
        return GridFunction(f.grid, np.zeros(f.grid.size))
    return inverse(block_spectrum(transform(f), j, profile))


def low_cutoff(f: GridFunction, j: int, profile: BumpProfile = DEFAULT_PROFILE) -> GridFunction:
    """Sum of blocks below j: the chi(2^-j .) plateau multiplier for j >= 0.

    The order -1 cutoff is the empty block sum, i.e. zero.  The plateau
    multiplier is exact on every representable mode, so no resolution
    precondition applies here; constructions that need the cutoff to act
    below the Nyquist frequency check their own bandwidth.
    """
    if j < -1:
        raise ValueError(f"cutoff order must be >= -1, got {j}")
    if j == -1:
        return GridFunction(f.grid, np.zeros(f.grid.size))
    s = transform(f)
    xi = f.grid.wavenumbers().astype(np.float64)
    mask = profile.chi(xi / float(2**j))
    return inverse(Spectrum(f.grid, s.coeffs * mask))


@dataclass(frozen=True)
class BlockDecomposition:
    """All blocks of a function, j = -1 .. max_block_index(grid)."""

    source: GridFunction
    profile: BumpProfile
    blocks: tuple[GridFunction, ...]

    @property
    def j_values(self) -> range:
        return range(-1, len(self.blocks) - 1)

    def block(self, j: int) -> GridFunction:
        if j <= -2 or j > max_block_index(self.source.grid):
            return GridFunction(self.source.grid, np.zeros(self.source.grid.size))
        return self.blocks[j + 1]

    def block_norms(self, p: float) -> np.ndarray:
        return np.array([b.lp_norm(p) for b in self.blocks])

    def reconstruct(self) -> GridFunction:
        total = np.zeros(self.source.grid.size)
        for b in self.blocks:
            total += b.samples
        return GridFunction(self.source.grid, total)


def decompose(f: GridFunction, profile: BumpProfile = DEFAULT_PROFILE) -> BlockDecomposition:
    js = range(-1, max_block_index(f.grid) + 1)
    s = transform(f)
    blocks = tuple(inverse(block_spectrum(s, j, profile)) for j in js)
    return BlockDecomposition(f, profile, blocks)


@dataclass(frozen=True)
class BesovSpec:
    """Smoothness s, integrability p, summability r for a Besov norm."""

    s: float
    p: float
    r: float

    def __post_init__(self) -> None:
        if not (self.p >= 1 and self.r >= 1):
            raise ValueError("p and r must lie in [1, inf]")


def _active_absolute_range(s: Spectrum) -> tuple[int, int] | None:
    """Smallest and largest |xi| carrying a nonzero coefficient, or None."""
    mags = np.abs(s.coeffs)
    active = np.nonzero(mags > 0.0)[0]
    if active.size == 0:
        return None
    absxi = np.abs(s.grid.wavenumbers()[active])
    return int(absxi.min()), int(absxi.max())


def besov_norm(
    f: GridFunction, spec: BesovSpec, profile: BumpProfile = DEFAULT_PROFILE
) -> float:
    """(sum_j 2^{sjr} |block_j f|_{L^p}^r)^{1/r}, sup over j when r = inf.

    Blocks whose annulus misses the active part of the spectrum are
    skipped; they are identically zero.
    """
    s = transform(f)
    rng = _active_absolute_range(s)
    if rng is None:
        return 0.0
    lo, hi = rng
    terms: list[float] = []
    for j in range(-1, max_block_index(f.grid) + 1):
        if j == -1:
            touches = lo < SUPPORT_RADIUS  # chi support is |xi| < 4/3
        else:
            touches = (PLATEAU_RADIUS * 2.0**j < hi) and (SUPPORT_RADIUS * 2.0 ** (j + 1) > lo)
        if not touches:
            continue
        norm = inverse(block_spectrum(s, j, profile)).lp_norm(spec.p)
        if norm > 0.0:
            terms.append(2.0 ** (spec.s * j) * norm)
    if not terms:
        return 0.0
    arr = np.array(terms)
    if np.isinf(spec.r):
        return float(arr.max())
    return float(np.sum(arr**spec.r) ** (1.0 / spec.r))


@dataclass(frozen=True)
class FrequencyBand:
    """Window of block indices j in [n/8, n/4] for a construction size n."""

    n: int

    def __post_init__(self) -> None:
        if self.n < 8 or self.n % 8 != 0:
            raise ValueError(f"band parameter must be a positive multiple of 8, got {self.n}")

    @property
    def j_lo(self) -> int:
        return self.n // 8

    @property
    def j_hi(self) -> int:
        return self.n // 4

    @property
    def js(self) -> range:
        return range(self.j_lo, self.j_hi + 1)


def restricted_norm(
    f: GridFunction,
    k: int,
    band: FrequencyBand,
    profile: BumpProfile = DEFAULT_PROFILE,
) -> float:
    """sum over j in the band of 2^{kj} |block_j f|_sup, k in {0, 1}."""
    if k not in (0, 1):
        raise ValueError(f"weight exponent must be 0 or 1, got {k}")
    _check_block_resolved(f.grid, band.j_hi)
    s = transform(f)
    rng = _active_absolute_range(s)
    if rng is None:
        return 0.0
    lo, hi = rng
    total = 0.0
    for j in band.js:
        if (PLATEAU_RADIUS * 2.0**j >= hi + 1) or (SUPPORT_RADIUS * 2.0 ** (j + 1) <= lo):
            continue
        total += 2.0 ** (k * j) * inverse(block_spectrum(s, j, profile)).sup_norm()
    return total


def commutator(
    v: GridFunction,
    f: GridFunction,
    j: int,
    profile: BumpProfile = DEFAULT_PROFILE,
) -> GridFunction:
    """[block_j, v] d/dx f = block_j(v f') - v block_j(f'), products dealiased."""
    if v.grid.size != f.grid.size:
        raise ValueError("operands must share a grid")
    fx = inverse(derivative(transform(f)))
    first = block(dealiased_product(v, fx, DealiasRule.QUADRATIC), j, profile)
    second = dealiased_product(v, block(fx, j, profile), DealiasRule.QUADRATIC)
    return GridFunction(v.grid, first.samples - second.samples)


def partition_defect(xis: np.ndarray, profile: BumpProfile = DEFAULT_PROFILE) -> float:
    """max |chi(xi) + sum_j phi(2^-j xi) - 1| over the given frequencies."""
    xis = np.asarray(xis, dtype=np.float64)
    top = float(np.max(np.abs(xis))) if xis.size else 0.0
    j_top = max(0, math.ceil(math.log2(max(top, 1.0) / profile.inner)))
    total = profile.chi(xis)
    for j in range(j_top + 1):
        total = total + profile.phi_dyadic(xis, j)
    return float(np.max(np.abs(total - 1.0)))
