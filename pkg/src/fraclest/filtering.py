"""Isotropic box filtering and exact residual-stress extraction.

The filter is a separable discrete top-hat applied per axis with periodic
wrap.  For half-width ``m = l_delta`` cells the stencil covers offsets
``-m..m`` with trapezoidal weights (1/2 at the two end cells, 1 inside),
normalized by ``2*m``; the weights sum to one, so the field mean is
preserved.  ``l_delta = 0`` is the identity filter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.ndimage

from .errors import UnsupportedFilterWidthError
from .grid import (PHYSICAL, GridSpec, ScalarField, SymmetricTensorField,
                   TENSOR_COMPONENTS, VectorField, tensor_divergence)


@dataclass(frozen=True)
class BoxFilterSpec:
    """Filter-to-grid ratio ``l_delta = L_filter / (2*dx)``."""

    l_delta: float

    def __post_init__(self):
        if self.l_delta < 0:
            raise UnsupportedFilterWidthError(
                f"filter ratio must be nonnegative, got {self.l_delta}")

    @property
    def width_cells(self) -> float:
        return 2.0 * self.l_delta

    def physical_width(self, grid: GridSpec) -> float:
        return self.width_cells * grid.dx

    def half_width_cells(self) -> int:
        """Integer half-width; raises for non-integer ratios."""
        m = round(self.l_delta)
        if abs(self.l_delta - m) > 1e-12:
            raise UnsupportedFilterWidthError(
                f"only integer filter ratios are supported, got {self.l_delta}")
        return int(m)


@dataclass(frozen=True)
class FilteredPair:
    """Filtered velocity together with the residual stress it leaves behind."""

    filtered: VectorField
    residual_stress: SymmetricTensorField


def filter_weights(m: int) -> np.ndarray:
    """Trapezoidal top-hat weights over offsets ``-m..m`` (sum exactly 1)."""
    if m == 0:
        return np.array([1.0])
    w = np.ones(2 * m + 1)
    w[0] = w[-1] = 0.5
    return w / (2.0 * m)


def box_filter(f: ScalarField, spec: BoxFilterSpec) -> ScalarField:
    m = spec.half_width_cells()
    if m == 0:
        return f
    w = filter_weights(m)
    data = f.to_physical().data
    for axis in range(3):
        data = scipy.ndimage.convolve1d(data, w, axis=axis, mode="wrap")
    out = ScalarField(f.grid, PHYSICAL, data)
    return out if f.rep == PHYSICAL else out.to_spectral()


def filter_velocity(v: VectorField, spec: BoxFilterSpec) -> VectorField:
    return VectorField(tuple(box_filter(c, spec) for c in v.components))


def true_sgs_stress(v: VectorField, spec: BoxFilterSpec) -> FilteredPair:
    """Residual stress ``tau_ij = filt(v_i v_j) - vbar_i vbar_j`` from resolved data."""
    phys = v.to_physical()
    u = [c.data for c in phys.components]
    vbar = filter_velocity(phys, spec)
    ub = [c.data for c in vbar.components]
    stress = []
    for (i, j) in TENSOR_COMPONENTS:
        prod = ScalarField(v.grid, PHYSICAL, u[i] * u[j])
        stress.append(box_filter(prod, spec).data - ub[i] * ub[j])
    return FilteredPair(
        filtered=vbar,
        residual_stress=SymmetricTensorField.from_arrays(v.grid, PHYSICAL, stress))


def true_sgs_divergence(pair: FilteredPair) -> VectorField:
    """Ground-truth model target: row divergence of the residual stress."""
    return tensor_divergence(pair.residual_stress)
