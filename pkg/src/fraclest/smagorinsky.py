"""Constant-coefficient eddy-viscosity baseline for the a priori sweeps.

Stress: ``tau_ij = -2 * nu_sgs * S_ij`` with ``nu_sgs = (Cs * L)**2 * |S|``
and ``|S| = sqrt(2 * S_ij S_ij)``.  The default uses the standard 1/2-strain
``S_ij``; the ``paper_convention`` flag doubles the strain consistently in
both ``|S|`` and the stress.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .grid import (PHYSICAL, SPECTRAL, ScalarField, SymmetricTensorField,
                   VectorField, apply_dealias, strain_rate, tensor_divergence)


@dataclass(frozen=True)
class SmagorinskyParams:
    """Model constant and the physical filter width it is tied to."""

    filter_width_l: float
    cs: float = 0.17
    paper_convention: bool = False

    def __post_init__(self):
        if self.cs < 0:
            raise ParameterError(f"Smagorinsky constant must be >= 0, got {self.cs}")
        if self.filter_width_l <= 0:
            raise ParameterError("filter width must be positive")


def smagorinsky_stress(vbar: VectorField, p: SmagorinskyParams) -> SymmetricTensorField:
    s = strain_rate(vbar, paper_convention=p.paper_convention).to_physical()
    # |S|^2 = 2 S_ij S_ij, off-diagonal components counted twice
    s_arrays = [c.data for c in s.components]
    ssum = (s_arrays[0] ** 2 + s_arrays[3] ** 2 + s_arrays[5] ** 2
            + 2.0 * (s_arrays[1] ** 2 + s_arrays[2] ** 2 + s_arrays[4] ** 2))
    nu_sgs = (p.cs * p.filter_width_l) ** 2 * np.sqrt(2.0 * ssum)
    comps = [ScalarField(vbar.grid, PHYSICAL, -2.0 * nu_sgs * a) for a in s_arrays]
    out = SymmetricTensorField(tuple(comps))
    return out if vbar.rep == PHYSICAL else out.to_spectral()


def smagorinsky_divergence(vbar: VectorField, p: SmagorinskyParams) -> VectorField:
    """Row divergence of the model stress; the nonlinear product is dealiased."""
    stress = smagorinsky_stress(vbar, p)
    dealiased = SymmetricTensorField(
        tuple(apply_dealias(c.to_spectral()) for c in stress.components))
    div = tensor_divergence(dealiased)
    return div if vbar.rep == SPECTRAL else div.to_physical()
