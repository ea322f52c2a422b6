"""Pseudo-spectral incompressible Navier-Stokes solver for periodic-box HIT.

Spatial discretization is Fourier-Galerkin with the 2/3 rule applied to the
nonlinear term (rotational form ``u x omega``; the gradient part is removed
by the Leray projection).  Time integration is a Heun (RK2) predictor-
corrector on the integrating-factor transformed system, so the viscous term
is integrated exactly and the overall scheme is second order with an
unconditionally stable viscous treatment.  The k=0 mode of the nonlinear
term is analytically zero for periodic flow and is pinned to zero, which
conserves mean momentum exactly in unforced runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (BlowupError, DegenerateStatisticsError, ParameterError,
                     SpectrumError)
from .grid import (PHYSICAL, SPECTRAL, GridSpec, VectorField, fftn,
                   grid_wavenumbers, ifftn, _project_solenoidal_raw)


@dataclass(frozen=True)
class LowShellForcing:
    """Constant-power energy injection confined to wavenumber shells <= k_f."""

    power: float
    k_f: int = 2

    def __post_init__(self):
        if self.power < 0 or self.k_f < 1:
            raise ParameterError("forcing needs power >= 0 and k_f >= 1")


@dataclass(frozen=True)
class SolverConfig:
    grid: GridSpec
    nu: float
    dt: float
    t_end: float
    forcing: LowShellForcing | None = None
    seed: int = 0
    snapshot_times: tuple[float, ...] = ()
    cfl: float | None = None          # when set, dt is capped by cfl*dx/max|v|
    stats_every: int = 1              # history cadence in steps

    def __post_init__(self):
        if self.dt <= 0 or self.nu <= 0:
            raise ParameterError("dt and nu must be positive")
        if self.cfl is not None and not 0 < self.cfl <= 0.5:
            raise ParameterError("CFL target must lie in (0, 0.5]")
        if self.stats_every < 1:
            raise ParameterError("stats_every must be >= 1")
        object.__setattr__(self, "snapshot_times",
                           tuple(sorted(float(t) for t in self.snapshot_times)))


@dataclass(frozen=True)
class FlowStats:
    """Macroscopic turbulence statistics of one snapshot."""

    time: float
    k: float                 # turbulent kinetic energy (1/2)<v'_i v'_i>
    e_tot: float             # <v'_i v'_i>
    u_rms: float             # sqrt(2K/3)
    eps: float               # 2 nu <S_ij S_ij>
    re_lambda: float
    taylor_lambda: float
    eta: float
    k_max_eta: float
    integral_scale: float
    eddy_turnover: float
    deriv_skewness: float
    deriv_flatness: float


def taylor_microscale(nu: float, u_rms: float, eps: float) -> float:
    return math.sqrt(15.0 * nu * u_rms ** 2 / eps)


def reynolds_lambda(u_rms: float, taylor_lambda: float, nu: float) -> float:
    return u_rms * taylor_lambda / nu


def kolmogorov_eta(nu: float, eps: float) -> float:
    return (nu ** 3 / eps) ** 0.25


def resolved_k_max(grid: GridSpec) -> float:
    """Largest wavenumber magnitude retained per axis after dealiasing."""
    return ((grid.n - 1) // 3) * grid.k0


def shell_spectrum(vhat: np.ndarray, grid: GridSpec):
    """Integer-shell energy spectrum from spectral velocity (3, n, n, n).

    Shell m collects modes with ``m - 1/2 < |k|/k0 <= m + 1/2``; the
    returned energies sum to the total fluctuation energy K.
    """
    w = grid_wavenumbers(grid)
    n3 = grid.n ** 3
    shell = np.rint(w["k_mag"] / grid.k0).astype(np.int64).ravel()
    e_mode = 0.5 * (np.abs(vhat[0]) ** 2 + np.abs(vhat[1]) ** 2
                    + np.abs(vhat[2]) ** 2).ravel() / n3 ** 2
    e_mode[0] = 0.0  # exclude the mean
    energies = np.bincount(shell, weights=e_mode)
    ks = np.arange(len(energies)) * grid.k0
    return ks, energies


def _moments_over_diagonal_derivatives(vhat, w):
    """Skewness and flatness of dv_i/dx_i, averaged over components."""
    skews, flats = [], []
    for i in range(3):
        g = ifftn(w["ik"][i] * vhat[i]).real
        m2 = float(np.mean(g * g))
        if m2 <= 0.0:
            continue
        skews.append(float(np.mean(g ** 3)) / m2 ** 1.5)
        flats.append(float(np.mean(g ** 4)) / m2 ** 2)
    if not skews:
        return 0.0, 0.0
    return float(np.mean(skews)), float(np.mean(flats))


def _stats_from_spectral(vhat: np.ndarray, grid: GridSpec, nu: float,
                         time: float) -> FlowStats:
    w = grid_wavenumbers(grid)
    n3 = grid.n ** 3

    fluct = vhat.copy()
    fluct[:, 0, 0, 0] = 0.0
    e_tot = float(np.sum(np.abs(fluct) ** 2)) / n3 ** 2
    kinetic = 0.5 * e_tot
    u_rms = math.sqrt(e_tot / 3.0) if e_tot > 0 else 0.0

    # <S_ij S_ij> by Parseval over the 6 stored components (off-diagonals twice)
    ss = 0.0
    for idx, (i, j) in enumerate(((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))):
        sh = 0.5 * (w["ik"][j] * fluct[i] + w["ik"][i] * fluct[j])
        weight = 1.0 if i == j else 2.0
        ss += weight * float(np.sum(np.abs(sh) ** 2))
    ss /= n3 ** 2
    eps = 2.0 * nu * ss
    if eps <= 0.0:
        raise DegenerateStatisticsError("zero dissipation: statistics undefined")

    lam = taylor_microscale(nu, u_rms, eps)
    re_lam = reynolds_lambda(u_rms, lam, nu)
    eta = kolmogorov_eta(nu, eps)

    ks, e_shell = shell_spectrum(fluct, grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_k_sum = float(np.sum(e_shell[1:] / ks[1:]))
    l_int = 3.0 * np.pi / (4.0 * kinetic) * inv_k_sum if kinetic > 0 else 0.0
    tau_l = l_int / u_rms if u_rms > 0 else 0.0

    skew, flat = _moments_over_diagonal_derivatives(fluct, w)
    return FlowStats(time=time, k=kinetic, e_tot=e_tot, u_rms=u_rms, eps=eps,
                     re_lambda=re_lam, taylor_lambda=lam, eta=eta,
                     k_max_eta=resolved_k_max(grid) * eta,
                     integral_scale=l_int, eddy_turnover=tau_l,
                     deriv_skewness=skew, deriv_flatness=flat)


def compute_stats(v: VectorField, nu: float, time: float = 0.0) -> FlowStats:
    vhat = np.stack([c.to_spectral().data for c in v.components])
    return _stats_from_spectral(vhat, v.grid, nu, time)


def generate_ic(grid: GridSpec, target_energy: float, peak_k: int,
                seed: int) -> VectorField:
    """Solenoidal random field with model spectrum ``k^4 exp(-2 (k/k_p)^2)``.

    The result is zero-mean, strictly confined below the dealias cutoff, and
    rescaled so the measured kinetic energy equals ``target_energy`` exactly.
    """
    if target_energy <= 0:
        raise ParameterError("target energy must be positive")
    kc = (grid.n - 1) // 3
    if peak_k >= kc:
        raise SpectrumError(f"peak_k={peak_k} must lie below the dealias "
                            f"cutoff {kc} of an n={grid.n} grid")
    w = grid_wavenumbers(grid)
    rng = np.random.Generator(np.random.Philox(seed))
    vhat = fftn(rng.standard_normal((3, grid.n, grid.n, grid.n)), axes=(1, 2, 3))
    vhat *= w["dealias"]
    vhat[:, 0, 0, 0] = 0.0
    vhat = _project_solenoidal_raw(vhat, w)

    ks, e_now = shell_spectrum(vhat, grid)
    m = np.arange(len(e_now), dtype=float)
    target = m ** 4 * np.exp(-2.0 * (m / peak_k) ** 2)
    factor = np.zeros(len(e_now))
    good = e_now > 0
    factor[good] = np.sqrt(target[good] / e_now[good])
    shell_idx = np.rint(w["k_mag"] / grid.k0).astype(np.int64)
    vhat *= factor[shell_idx]

    u = ifftn(vhat, axes=(1, 2, 3)).real
    k_now = 0.5 * float(np.mean(u[0] ** 2 + u[1] ** 2 + u[2] ** 2))
    u *= math.sqrt(target_energy / k_now)
    return VectorField.from_arrays(grid, PHYSICAL, list(u))


@lru_cache(maxsize=16)
def _viscous_factor(n: int, domain_length: float, nu: float, dt: float):
    w = _wn(n, domain_length)
    e = np.exp(-nu * w["k_sq"] * dt)
    e.flags.writeable = False
    return e


def _wn(n, domain_length):
    return grid_wavenumbers(GridSpec(n, domain_length))


def _curl_hat(vhat, w):
    ik = w["ik"]
    out = np.empty_like(vhat)
    np.multiply(ik[1], vhat[2], out=out[0])
    out[0] -= ik[2] * vhat[1]
    np.multiply(ik[2], vhat[0], out=out[1])
    out[1] -= ik[0] * vhat[2]
    np.multiply(ik[0], vhat[1], out=out[2])
    out[2] -= ik[1] * vhat[0]
    return out


@lru_cache(maxsize=16)
def _forcing_shell(n: int, domain_length: float, k_f: int):
    w = _wn(n, domain_length)
    k0 = 2.0 * np.pi / domain_length
    mask = (w["k_mag"] <= (k_f + 0.5) * k0)
    mask[0, 0, 0] = False
    mask.flags.writeable = False
    return mask


def _nonlinear(vhat: np.ndarray, grid: GridSpec, forcing: LowShellForcing | None):
    """Projected, dealiased rotational nonlinear term plus forcing.

    Returns (rhs_hat, max_velocity) so the caller can track the CFL number.
    """
    w = grid_wavenumbers(grid)
    u = ifftn(vhat, axes=(1, 2, 3)).real
    omega = ifftn(_curl_hat(vhat, w), axes=(1, 2, 3)).real
    cross = np.empty_like(u)
    np.multiply(u[1], omega[2], out=cross[0])
    cross[0] -= u[2] * omega[1]
    np.multiply(u[2], omega[0], out=cross[1])
    cross[1] -= u[0] * omega[2]
    np.multiply(u[0], omega[1], out=cross[2])
    cross[2] -= u[1] * omega[0]
    rhs = fftn(cross, axes=(1, 2, 3))
    rhs *= w["dealias"]
    rhs[:, 0, 0, 0] = 0.0
    _project_solenoidal_raw(rhs, w, in_place=True)

    if forcing is not None and forcing.power > 0:
        shell = _forcing_shell(grid.n, grid.domain_length, forcing.k_f)
        n3 = grid.n ** 3
        e_f = 0.5 * float(np.sum(np.abs(vhat[:, shell]) ** 2)) / n3 ** 2
        if e_f > 1e-300:
            rhs[:, shell] += (forcing.power / (2.0 * e_f)) * vhat[:, shell]

    umax = float(np.max(np.abs(u)))
    return rhs, umax


def _step_spectral(vhat: np.ndarray, cfg: SolverConfig, t: float):
    """One integrating-factor Heun step; returns (vhat_new, dt_used, umax)."""
    g0, umax = _nonlinear(vhat, cfg.grid, cfg.forcing)
    dt = cfg.dt
    if cfg.cfl is not None and umax > 0:
        dt = min(dt, cfg.cfl * cfg.grid.dx / umax)
    e = _viscous_factor(cfg.grid.n, cfg.grid.domain_length, cfg.nu, dt)

    # predictor: exp(-nu k^2 dt) * (v + dt*G(v))
    pred = vhat + dt * g0
    pred *= e
    g1, _ = _nonlinear(pred, cfg.grid, cfg.forcing)
    # corrector: E*v + dt/2 * (E*G0 + G1)
    g0 *= e
    g0 += g1
    g0 *= 0.5 * dt
    new = e * vhat
    new += g0
    # single-pass blowup guard: the energy sum is non-finite iff any mode is
    energy = np.vdot(new, new)
    if not np.isfinite(energy.real):
        raise BlowupError(f"solution blew up after t={t:.6g}", last_stable_time=t)
    return new, dt, umax


def _prepare_state(ic: VectorField, grid: GridSpec) -> np.ndarray:
    if ic.grid != grid:
        raise ParameterError("initial condition grid does not match config")
    w = grid_wavenumbers(grid)
    vhat = np.stack([c.to_spectral().data for c in ic.components])
    vhat *= w["dealias"]  # the mask keeps k=0, so a mean flow survives
    return _project_solenoidal_raw(vhat, w, in_place=True)


def step(state: VectorField, cfg: SolverConfig, t: float = 0.0) -> VectorField:
    """Advance one time step; pure function of the input state."""
    vhat, _, _ = _step_spectral(_prepare_state(state, cfg.grid), cfg, t)
    out = VectorField.from_arrays(cfg.grid, SPECTRAL, list(vhat))
    return out if state.rep == SPECTRAL else out.to_physical()


def _run(cfg: SolverConfig, ic: VectorField):
    vhat = _prepare_state(ic, cfg.grid)
    t = 0.0
    history = [_stats_from_spectral(vhat, cfg.grid, cfg.nu, t)]
    snapshots: list[tuple[float, VectorField]] = []
    pending = list(cfg.snapshot_times)
    istep = 0
    while t < cfg.t_end - 1e-12:
        vhat, dt, _ = _step_spectral(vhat, cfg, t)
        t += dt
        istep += 1
        if istep % cfg.stats_every == 0 or t >= cfg.t_end - 1e-12:
            history.append(_stats_from_spectral(vhat, cfg.grid, cfg.nu, t))
        while pending and t >= pending[0] - 1e-9:
            u = ifftn(vhat, axes=(1, 2, 3)).real
            snapshots.append((t, VectorField.from_arrays(cfg.grid, PHYSICAL, list(u))))
            pending.pop(0)
    return snapshots, history


def run_decaying(cfg: SolverConfig, ic: VectorField):
    """Integrate an unforced run; returns (snapshots, history)."""
    if cfg.forcing is not None:
        raise ParameterError("decaying run must not define forcing")
    return _run(cfg, ic)


def run_forced(cfg: SolverConfig, ic: VectorField):
    """Integrate with low-shell constant-power forcing."""
    if cfg.forcing is None:
        raise ParameterError("forced run requires a forcing configuration")
    return _run(cfg, ic)
