"""Fractional spectral operators and the fractional subgrid closure.

All operators are Fourier multipliers on the periodic cube:

* fractional Laplacian: ``|k|**(2*alpha)``, zero at k=0, recovers the
  (negative) Laplacian at ``alpha = 1``;
* Riesz potential: ``|k|**(-2*alpha)`` on k != 0 (inverse of the above on
  mean-free fields);
* Riesz transform along axis j: ``-i*k_j/|k|`` (Nyquist plane zeroed like
  any odd-derivative multiplier).

The closure coefficient chain is

    tau   = nu / U**2
    c_a   = c_bar * alpha**2
    C_a   = 2**(2a) * Gamma(a + 3/2) / (pi**(3/2) * Gamma(-a)) * c_a
    mu_a  = rho * (U*tau)**(2a) / tau * Gamma(2a + 1) * C_a
    nu_a  = mu_a / rho

``Gamma(-a)`` is negative on (0, 1), so the signed ``nu_a`` is negative;
the model divergence applies its magnitude so the term acts dissipatively.
``alpha = 1`` hits the Gamma pole and is returned as an exact zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.special as special

from .errors import DegenerateFieldError, NonzeroMeanError, ParameterError
from .grid import (GridSpec, ScalarField, SymmetricTensorField, VectorField,
                   PHYSICAL, SPECTRAL, TENSOR_COMPONENTS, grid_wavenumbers,
                   ifftn)

_D = 3  # spatial dimension of the cube


def validate_alpha(alpha: float) -> float:
    if not 0.0 < alpha <= 1.0:
        raise ParameterError(f"fractional exponent must lie in (0, 1], got {alpha}")
    return float(alpha)


@dataclass(frozen=True)
class FsgsParams:
    """Physical inputs of the closure coefficient chain."""

    nu: float
    alpha: float
    rho: float = 1.0
    agitation_speed_u: float = 502.0
    c_bar: float = 1500.0

    def __post_init__(self):
        validate_alpha(self.alpha)
        if self.nu <= 0 or self.rho <= 0 or self.agitation_speed_u <= 0:
            raise ParameterError("nu, rho and agitation speed must be positive")

    @property
    def tau(self) -> float:
        """Relaxation time; chosen so that rho*U**2*tau equals rho*nu."""
        return self.nu / self.agitation_speed_u ** 2

    @property
    def mu(self) -> float:
        """Dynamic viscosity rho*nu."""
        return self.rho * self.nu


@dataclass(frozen=True)
class FsgsCoefficients:
    """Signed closure coefficients; the model term uses the magnitude."""

    mu_alpha: float
    nu_alpha: float

    @property
    def nu_magnitude(self) -> float:
        return abs(self.nu_alpha)

    @property
    def mu_magnitude(self) -> float:
        return abs(self.mu_alpha)


def fsgs_coefficient(params: FsgsParams) -> FsgsCoefficients:
    """Evaluate the closure coefficients (exact zero at alpha = 1)."""
    a = validate_alpha(params.alpha)
    if a == 1.0:
        return FsgsCoefficients(0.0, 0.0)
    frak_c = params.c_bar * a * a
    c_alpha = (2.0 ** (2 * a) * special.gamma(a + _D / 2.0)
               / np.pi ** (_D / 2.0) * special.rgamma(-a) * frak_c)
    tau = params.tau
    u = params.agitation_speed_u
    mu_alpha = (params.rho * (u * tau) ** (2 * a) / tau
                * special.gamma(2 * a + 1) * c_alpha)
    return FsgsCoefficients(float(mu_alpha), float(mu_alpha) / params.rho)


@lru_cache(maxsize=64)
def _power_multiplier(n: int, domain_length: float, exponent: float) -> np.ndarray:
    """Cached ``|k|**exponent`` with the k=0 entry forced to zero."""
    w = grid_wavenumbers(GridSpec(n, domain_length))
    safe = w["k_mag"].copy()
    safe[0, 0, 0] = 1.0
    mult = safe ** exponent
    mult[0, 0, 0] = 0.0
    mult.flags.writeable = False
    return mult


def _apply_multiplier(f: ScalarField, mult: np.ndarray) -> ScalarField:
    out = ScalarField(f.grid, SPECTRAL, mult * f.to_spectral().data)
    return out if f.rep == SPECTRAL else out.to_physical()


def _require_mean_free(f: ScalarField, what: str) -> None:
    scale = f.rms()
    if abs(f.mean()) > 1e-10 * max(scale, np.finfo(float).tiny):
        raise NonzeroMeanError(f"{what} requires a mean-free field "
                               f"(mean {f.mean():.3e}, rms {scale:.3e})")


def fractional_laplacian(f, alpha: float):
    """Apply ``(-Lap)**alpha`` to a scalar or vector field (mean annihilated)."""
    a = validate_alpha(alpha)
    if isinstance(f, VectorField):
        return VectorField(tuple(fractional_laplacian(c, a) for c in f.components))
    mult = _power_multiplier(f.grid.n, f.grid.domain_length, 2.0 * a)
    return _apply_multiplier(f, mult)


def riesz_potential(f: ScalarField, alpha: float) -> ScalarField:
    """Inverse fractional Laplacian on mean-free fields."""
    a = validate_alpha(alpha)
    _require_mean_free(f, "Riesz potential")
    mult = _power_multiplier(f.grid.n, f.grid.domain_length, -2.0 * a)
    return _apply_multiplier(f, mult)


def riesz_transform(f: ScalarField, axis: int) -> ScalarField:
    """Riesz transform along ``axis`` (multiplier ``-i*k_j/|k|``)."""
    _require_mean_free(f, "Riesz transform")
    w = grid_wavenumbers(f.grid)
    inv_k = _power_multiplier(f.grid.n, f.grid.domain_length, -1.0)
    return _apply_multiplier(f, -w["ik"][axis] * inv_k)


def _riesz_half_order_component(vh, grid: GridSpec, i: int, j: int, alpha: float):
    """Spectral ``R_j (-Lap)**(alpha-1/2) v_i`` from spectral component data."""
    w = grid_wavenumbers(grid)
    # -i k_j / |k| * |k|**(2 alpha - 1), with k=0 and the j-Nyquist plane zeroed
    mult = -w["ik"][j] * _power_multiplier(grid.n, grid.domain_length, 2.0 * alpha - 2.0)
    return mult * vh[i]


def equivalent_sgs_stress(vbar: VectorField, alpha: float) -> SymmetricTensorField:
    """Stress-level form of the closure.

    Built so its row divergence reproduces the fractional Laplacian of a
    solenoidal field exactly: ``T_ij = R_j H v_i + R_i H v_j`` with
    ``H = (-Lap)**(alpha - 1/2)``.  Any k=0 content of ``vbar`` is dropped by
    the multipliers, so a uniform velocity shift leaves the tensor unchanged.
    """
    a = validate_alpha(alpha)
    vh = [c.to_spectral().data for c in vbar.components]
    comps = []
    for (i, j) in TENSOR_COMPONENTS:
        th = (_riesz_half_order_component(vh, vbar.grid, i, j, a)
              + _riesz_half_order_component(vh, vbar.grid, j, i, a))
        c = ScalarField(vbar.grid, SPECTRAL, th)
        comps.append(c if vbar.rep == SPECTRAL else c.to_physical())
    return SymmetricTensorField(tuple(comps))


def fsgs_divergence(vbar: VectorField, params: FsgsParams) -> VectorField:
    """Model divergence ``|nu_alpha| * (-Lap)**alpha vbar`` per component."""
    coeff = fsgs_coefficient(params)
    if coeff.nu_magnitude == 0.0:
        zero = np.zeros(vbar.grid.shape)
        out = VectorField.from_arrays(vbar.grid, PHYSICAL, [zero, zero, zero])
        return out if vbar.rep == PHYSICAL else out.to_spectral()
    frac = fractional_laplacian(vbar, params.alpha)
    arrays = [coeff.nu_magnitude * c.data for c in frac.components]
    return VectorField.from_arrays(vbar.grid, frac.rep, arrays)


@dataclass(frozen=True)
class EntropyBound:
    """Second-law cap on the closure coefficient for one resolved field."""

    mu_max: float
    satisfied: bool


def entropy_bound(vbar: VectorField, params: FsgsParams) -> EntropyBound:
    """Pointwise entropy-production bound.

    Computes ``mu * min |grad:grad / (T:grad)|`` over points where the
    denominator is resolvable, with ``T_ij = R_j (-Lap)**(alpha-1/2) v_i``,
    and reports whether ``|mu_alpha|`` respects the cap.
    """
    a = validate_alpha(params.alpha)
    w = grid_wavenumbers(vbar.grid)
    vh = [c.to_spectral().data for c in vbar.components]
    num = np.zeros(vbar.grid.shape)
    den = np.zeros(vbar.grid.shape)
    for i in range(3):
        for j in range(3):
            g_ij = ifftn(w["ik"][j] * vh[i]).real
            t_ij = ifftn(_riesz_half_order_component(vh, vbar.grid, i, j, a)).real
            num += g_ij * g_ij
            den += t_ij * g_ij

    eps_den = 1e-12 * float(np.sqrt(np.mean(den ** 2)))
    valid = np.abs(den) > eps_den
    if not np.any(valid):
        raise DegenerateFieldError("entropy bound undefined: denominator "
                                   "vanishes everywhere")
    mu_max = params.mu * float(np.min(np.abs(num[valid] / den[valid])))
    mu_alpha = fsgs_coefficient(params).mu_magnitude
    return EntropyBound(mu_max=mu_max, satisfied=bool(mu_alpha <= mu_max))
