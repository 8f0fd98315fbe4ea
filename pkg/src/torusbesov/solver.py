"""Dealiased pseudospectral time integration of the two transport equations.

Both equations are integrated in their nonlocal form

    ch       u_t = -u u_x - d/dx Hinv(u^2 + u_x^2 / 2)
    novikov  u_t = -u^2 u_x - 1/2 Hinv(u_x^3) - d/dx Hinv(3/2 u u_x^2 + u^3)

with Hinv = (1 - d^2/dx^2)^{-1}.  The state is kept as a truncated real
half-spectrum; products are formed pointwise on the grid and re-truncated
(2/3 rule for the quadratic equation, 1/2 rule for the cubic one), which
keeps every retained mode alias-free.  Advection is applied as the exact
derivative -1/2 (u^2)_x (resp. -(u^3)_x / 3), so the mean mode of the
quadratic right side vanishes identically, not just to roundoff.

Time stepping is classical four-stage Runge-Kutta under the step bound
dt <= cfl * dx / max(1, |u|_inf) (squared sup for the cubic equation),
re-checked against the current state every step; growth past a factor of
1000 of the initial sup, or any non-finite sample, aborts the run with
the partial trajectory attached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .blocks import (
    BesovSpec,
    BumpProfile,
    DEFAULT_PROFILE,
    FrequencyBand,
    besov_norm,
    restricted_norm,
)
from .data import InflationDatum
from .spectral import (
    DealiasRule,
    GridFunction,
    Spectrum,
    TorusGrid,
    dealiased_product,
    derivative,
    full_from_half,
    helmholtz_inverse,
    inverse,
    transform,
)

TWO_PI = 2.0 * np.pi

DIAGNOSTIC_KEYS = ("b1_norm", "b1_band_norm", "sup_norm", "dx_sup_norm", "h1_energy")


# ---------------------------------------------------------------------------
# right-hand sides
# ---------------------------------------------------------------------------


class _RawOperator:
    """Half-spectrum right side evaluator on raw rfft coefficients."""

    def __init__(self, grid: TorusGrid, equation: str):
        if equation not in ("ch", "novikov"):
            raise ValueError(f"unknown equation {equation!r}")
        self.grid = grid
        self.equation = equation
        self.rule = DealiasRule.QUADRATIC if equation == "ch" else DealiasRule.CUBIC
        n = grid.size
        xi = np.arange(n // 2 + 1, dtype=np.float64)
        ixi = 1j * xi
        ixi[-1] = 0.0  # Nyquist mode carries no derivative
        helm = 1.0 / (1.0 + xi * xi)
        mask = (xi <= self.rule.cutoff(n)).astype(np.float64)
        self.deriv = ixi
        if equation == "ch":
            # rhs_hat = A * rfft(u^2) + B * rfft(u_x^2)
            self.coef_a = mask * (-ixi) * (0.5 + helm)
            self.coef_b = mask * (-0.5) * ixi * helm
        else:
            # rhs_hat = C2 * rfft(u_x^3) + C3 * rfft(3/2 u u_x^2) + C4 * rfft(u^3)
            self.coef_c2 = mask * (-0.5) * helm
            self.coef_c3 = mask * (-ixi) * helm
            self.coef_c4 = mask * (-ixi) * (1.0 / 3.0 + helm)
        self.mask = mask

    def physical(self, state: np.ndarray) -> np.ndarray:
        return np.fft.irfft(state, n=self.grid.size)

    def rhs(self, state: np.ndarray, u: np.ndarray | None = None) -> np.ndarray:
        if u is None:
            u = self.physical(state)
        ux = np.fft.irfft(self.deriv * state, n=self.grid.size)
        if self.equation == "ch":
            p = np.fft.rfft(u * u)
            q = np.fft.rfft(ux * ux)
            return self.coef_a * p + self.coef_b * q
        ux2 = ux * ux
        p2 = np.fft.rfft(ux2 * ux)
        p3 = np.fft.rfft(1.5 * u * ux2)
        p4 = np.fft.rfft(u * u * u)
        return self.coef_c2 * p2 + self.coef_c3 * p3 + self.coef_c4 * p4

    def cfl_denominator(self, sup: float) -> float:
        if self.equation == "ch":
            return max(1.0, sup)
        return max(1.0, sup * sup)


def _raw_from_function(u: GridFunction, op: _RawOperator) -> np.ndarray:
    return np.fft.rfft(u.samples) * op.mask


def _function_from_raw(state: np.ndarray, grid: TorusGrid) -> GridFunction:
    return GridFunction(grid, np.fft.irfft(state, n=grid.size))


def rhs_ch(u: GridFunction) -> GridFunction:
    """Right side of the quadratic transport equation."""
    op = _RawOperator(u.grid, "ch")
    return _function_from_raw(op.rhs(_raw_from_function(u, op)), u.grid)


def rhs_novikov(u: GridFunction) -> GridFunction:
    """Right side of the cubic transport equation."""
    op = _RawOperator(u.grid, "novikov")
    return _function_from_raw(op.rhs(_raw_from_function(u, op)), u.grid)


# ---------------------------------------------------------------------------
# diagnostic fields
# ---------------------------------------------------------------------------


def e_field(u: GridFunction) -> GridFunction:
    """-1/2 d/dx Hinv (u_x)^2 with a dealiased square."""
    ux = inverse(derivative(transform(u)))
    sq = dealiased_product(ux, ux, DealiasRule.QUADRATIC)
    out = derivative(helmholtz_inverse(transform(sq)))
    return GridFunction(u.grid, -0.5 * inverse(out).samples)


def e0_field(u0: GridFunction) -> GridFunction:
    """The same field evaluated on the initial state."""
    return e_field(u0)


def f_field(u: GridFunction) -> GridFunction:
    """-d/dx Hinv u^2 with a dealiased square."""
    sq = dealiased_product(u, u, DealiasRule.QUADRATIC)
    out = derivative(helmholtz_inverse(transform(sq)))
    return GridFunction(u.grid, -inverse(out).samples)


def nonlocal_field(u: GridFunction, equation: str) -> GridFunction:
    """The full nonlocal forcing of the transport form of either equation."""
    if equation == "ch":
        return GridFunction(u.grid, e_field(u).samples + f_field(u).samples)
    if equation != "novikov":
        raise ValueError(f"unknown equation {equation!r}")
    ux = inverse(derivative(transform(u)))
    ux2 = dealiased_product(ux, ux, DealiasRule.CUBIC)
    ux3 = dealiased_product(ux2, ux, DealiasRule.CUBIC)
    uux2 = dealiased_product(u, ux2, DealiasRule.CUBIC)
    u2 = dealiased_product(u, u, DealiasRule.CUBIC)
    u3 = dealiased_product(u2, u, DealiasRule.CUBIC)
    first = helmholtz_inverse(transform(ux3))
    second = derivative(
        helmholtz_inverse(transform(GridFunction(u.grid, 1.5 * uux2.samples + u3.samples)))
    )
    return GridFunction(u.grid, -0.5 * inverse(first).samples - inverse(second).samples)


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SparseHalfSpectrum:
    """Nonzero half-spectrum entries above a relative drop threshold."""

    grid_size: int
    indices: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)  # package-convention coefficients

    def to_spectrum(self, grid: TorusGrid) -> Spectrum:
        half = np.zeros(grid.size // 2 + 1, dtype=np.complex128)
        half[self.indices] = self.values
        return Spectrum(grid, full_from_half(half, grid.size))

    def half(self) -> np.ndarray:
        half = np.zeros(self.grid_size // 2 + 1, dtype=np.complex128)
        half[self.indices] = self.values
        return half


@dataclass
class SolverConfig:
    equation: str
    T: float
    dt: float | None = None
    cfl_safety: float = 0.5
    record_stride: int | None = None
    flow_particles: int | None = None
    blowup_factor: float = 1e3
    record_drop_tol: float = 1e-15

    def __post_init__(self) -> None:
        if self.equation not in ("ch", "novikov"):
            raise ValueError(f"unknown equation {self.equation!r}")
        if not self.T > 0:
            raise ValueError("T must be positive")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ValueError("cfl_safety must lie in (0, 1]")
        if self.record_stride is not None and self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")


@dataclass
class TrajectoryRecord:
    grid: TorusGrid
    equation: str
    band: FrequencyBand | None
    dt: float
    record_stride: int
    times: list[float] = field(default_factory=list)
    spectra: list[SparseHalfSpectrum] = field(default_factory=list)
    diagnostics: dict[str, list[float]] = field(
        default_factory=lambda: {k: [] for k in DIAGNOSTIC_KEYS}
    )
    aborted: bool = False
    abort_reason: str | None = None

    def spectrum(self, i: int) -> Spectrum:
        return self.spectra[i].to_spectrum(self.grid)

    def state(self, i: int) -> GridFunction:
        return inverse(self.spectrum(i))

    @property
    def final_time(self) -> float:
        return self.times[-1]


def _sparsify(half: np.ndarray, grid_size: int, drop_tol: float) -> SparseHalfSpectrum:
    mags = np.abs(half)
    top = float(mags.max())
    keep = np.nonzero(mags > drop_tol * top)[0] if top > 0 else np.array([], dtype=np.int64)
    return SparseHalfSpectrum(
        grid_size=grid_size,
        indices=keep.astype(np.int64),
        values=half[keep].copy(),
    )


def _diagnostics(
    u: GridFunction,
    ux: GridFunction,
    band: FrequencyBand | None,
    profile: BumpProfile,
) -> dict[str, float]:
    w = u.grid.spacing
    out = {
        "b1_norm": besov_norm(u, BesovSpec(1.0, np.inf, 1), profile),
        "b1_band_norm": restricted_norm(u, 1, band, profile) if band else 0.0,
        "sup_norm": u.sup_norm(),
        "dx_sup_norm": ux.sup_norm(),
        "h1_energy": float(w * np.sum(u.samples**2 + ux.samples**2)),
    }
    return out


def _plan_steps(T: float, dt_target: float, record_stride: int | None) -> tuple[int, int]:
    """Uniform step count (multiple of 2 * stride) with dt <= dt_target."""
    raw = max(1, math.ceil(T / dt_target))
    if record_stride is None:
        record_stride = max(1, raw // 120)
    chunk = 2 * record_stride
    n_steps = math.ceil(raw / chunk) * chunk
    return n_steps, record_stride


def evolve(
    u0: InflationDatum | GridFunction,
    cfg: SolverConfig,
    band: FrequencyBand | None = None,
    profile: BumpProfile = DEFAULT_PROFILE,
    progress: bool = False,
) -> TrajectoryRecord:
    """Integrate the configured equation and record diagnostics.

    The step size is the CFL bound evaluated on the initial state unless
    overridden; the bound is re-checked against the evolving state and a
    violation aborts the run rather than silently shrinking the step (the
    record times must stay uniform for the flow-map integrator).
    """
    if isinstance(u0, InflationDatum):
        if band is None:
            band = u0.band
        start = u0.u0
    else:
        start = u0
    grid = start.grid
    op = _RawOperator(grid, cfg.equation)
    state = _raw_from_function(start, op)
    u_phys = op.physical(state)
    sup0 = float(np.max(np.abs(u_phys)))

    dt_bound = cfg.cfl_safety * grid.spacing / op.cfl_denominator(sup0)
    dt_target = min(cfg.dt, dt_bound) if cfg.dt is not None else dt_bound
    n_steps, stride = _plan_steps(cfg.T, dt_target, cfg.record_stride)
    dt = cfg.T / n_steps

    traj = TrajectoryRecord(
        grid=grid, equation=cfg.equation, band=band, dt=dt, record_stride=stride
    )

    def record(step: int, u_physical: np.ndarray, raw_state: np.ndarray) -> None:
        half = (TWO_PI / grid.size) * raw_state
        gf = GridFunction(grid, u_physical)
        gx = GridFunction(grid, np.fft.irfft(op.deriv * raw_state, n=grid.size))
        traj.times.append(step * dt)
        traj.spectra.append(_sparsify(half, grid.size, cfg.record_drop_tol))
        for key, val in _diagnostics(gf, gx, band, profile).items():
            traj.diagnostics[key].append(val)

    record(0, u_phys, state)
    for step in range(1, n_steps + 1):
        sup = float(np.max(np.abs(u_phys)))
        if not np.isfinite(sup) or sup > cfg.blowup_factor * max(sup0, 1e-300):
            traj.aborted = True
            traj.abort_reason = f"blow-up guard tripped at t={(step - 1) * dt:.6g} (sup={sup:.3e})"
            break
        if dt > cfg.cfl_safety * grid.spacing / op.cfl_denominator(sup) * (1 + 1e-12):
            traj.aborted = True
            traj.abort_reason = (
                f"cfl bound violated at t={(step - 1) * dt:.6g}: "
                f"dt={dt:.3e} exceeds {cfg.cfl_safety * grid.spacing / op.cfl_denominator(sup):.3e}"
            )
            break
        k1 = op.rhs(state, u_phys)
        k2 = op.rhs(state + (0.5 * dt) * k1)
        k3 = op.rhs(state + (0.5 * dt) * k2)
        k4 = op.rhs(state + dt * k3)
        state = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        u_phys = op.physical(state)
        if step % stride == 0:
            record(step, u_phys, state)
            if progress:
                print(
                    f"    t={step * dt:.5f}/{cfg.T:.5f} sup={np.max(np.abs(u_phys)):.3e}",
                    flush=True,
                )
    return traj


def h1_energy(u: GridFunction) -> float:
    ux = inverse(derivative(transform(u)))
    return float(u.grid.spacing * np.sum(u.samples**2 + ux.samples**2))


def evolve_advection(
    v0: GridFunction,
    velocity: GridFunction,
    T: float,
    dt: float | None = None,
    cfl_safety: float = 0.5,
    record_stride: int | None = None,
    record_drop_tol: float = 1e-15,
) -> TrajectoryRecord:
    """Passive transport d/dt v = -u v_x under a frozen velocity field.

    Same stepping and record layout as the nonlinear solver; used to
    exercise the flow-map identity where the forcing vanishes.
    """
    grid = v0.grid
    if velocity.grid.size != grid.size:
        raise ValueError("velocity and state must share a grid")
    n = grid.size
    xi = np.arange(n // 2 + 1, dtype=np.float64)
    ixi = 1j * xi
    ixi[-1] = 0.0
    mask = (xi <= DealiasRule.QUADRATIC.cutoff(n)).astype(np.float64)
    u = velocity.samples

    def rhs(state: np.ndarray) -> np.ndarray:
        vx = np.fft.irfft(ixi * state, n=n)
        return -mask * np.fft.rfft(u * vx)

    sup_u = float(np.max(np.abs(u)))
    dt_bound = cfl_safety * grid.spacing / max(1.0, sup_u)
    dt_target = min(dt, dt_bound) if dt is not None else dt_bound
    n_steps, stride = _plan_steps(T, dt_target, record_stride)
    step_dt = T / n_steps

    traj = TrajectoryRecord(
        grid=grid, equation="advection", band=None, dt=step_dt, record_stride=stride
    )
    state = np.fft.rfft(v0.samples) * mask

    def record(step: int, raw_state: np.ndarray) -> None:
        half = (TWO_PI / n) * raw_state
        traj.times.append(step * step_dt)
        traj.spectra.append(_sparsify(half, n, record_drop_tol))
        for key in DIAGNOSTIC_KEYS:
            traj.diagnostics[key].append(0.0)

    record(0, state)
    for step in range(1, n_steps + 1):
        k1 = rhs(state)
        k2 = rhs(state + (0.5 * step_dt) * k1)
        k3 = rhs(state + (0.5 * step_dt) * k2)
        k4 = rhs(state + step_dt * k3)
        state = state + (step_dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if step % stride == 0:
            record(step, state)
    return traj
