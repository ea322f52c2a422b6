"""Fields on a triply periodic cube and exact spectral differential operators.

Conventions (fixed once, relied on by every other module):

* Grid: ``n`` points per axis on ``[0, L)^3`` with spacing ``dx = L/n``;
  point ``(ix, iy, iz)`` sits at ``(ix*dx, iy*dx, iz*dx)``.  Physical data is
  stored C-ordered with axes ``(x, y, z)``, so z is fastest in memory.
* Transforms: forward FFT is the plain unnormalized sum, the inverse divides
  by ``n**3`` (numpy/scipy "backward" normalization).  Parseval then reads
  ``sum(f**2) == sum(|fhat|**2) / n**3``.
* Wavenumbers per axis: ``{0, ±1, ..., ±(n/2-1), -n/2} * (2*pi/L)``.
* Odd-derivative multipliers (gradient, divergence, Riesz transform) are
  zeroed on the Nyquist plane of their axis so real fields stay real.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft

from .errors import GridMismatchError, ParameterError, RepresentationError

PHYSICAL = "physical"
SPECTRAL = "spectral"

# Symmetric-tensor storage order and the (i, j) -> flat index map.
TENSOR_COMPONENTS = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))
_TENSOR_INDEX = {(0, 0): 0, (0, 1): 1, (0, 2): 2, (1, 1): 3, (1, 2): 4, (2, 2): 5,
                 (1, 0): 1, (2, 0): 2, (2, 1): 4}

_workers = int(os.environ.get("FRACLEST_THREADS", "1") or 1)


def set_num_threads(n: int) -> None:
    """Cap internal FFT parallelism at ``n`` worker threads."""
    global _workers
    if n < 1:
        raise ParameterError(f"thread count must be >= 1, got {n}")
    _workers = int(n)


def get_num_threads() -> int:
    return _workers


@dataclass(frozen=True)
class GridSpec:
    """Discretization of the periodic cube.

    Parameters
    ----------
    n : int
        Points per axis; must be even and at least 4.
    domain_length : float
        Physical edge length of the box (default ``2*pi``).
    """

    n: int
    domain_length: float = 2.0 * np.pi

    def __post_init__(self):
        if self.n < 4 or self.n % 2 != 0:
            raise ParameterError(f"grid size must be even and >= 4, got {self.n}")
        if not self.domain_length > 0:
            raise ParameterError("domain_length must be positive")

    @property
    def dx(self) -> float:
        return self.domain_length / self.n

    @property
    def k0(self) -> float:
        """Fundamental wavenumber 2*pi/L."""
        return 2.0 * np.pi / self.domain_length

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n)

    def coordinates(self):
        """Sparse ``(x, y, z)`` coordinate arrays broadcastable to the grid shape."""
        ax = np.arange(self.n) * self.dx
        return ax[:, None, None], ax[None, :, None], ax[None, None, :]


@lru_cache(maxsize=8)
def _wavenumbers(n: int, domain_length: float):
    """Cached wavenumber machinery for one grid geometry."""
    modes = np.rint(np.fft.fftfreq(n) * n).astype(np.int64)   # 0,1,..,n/2-1,-n/2,..,-1
    k0 = 2.0 * np.pi / domain_length
    k1d = modes * k0
    shapes = [(n, 1, 1), (1, n, 1), (1, 1, n)]
    k_axes = tuple(k1d.reshape(s) for s in shapes)
    m_axes = tuple(modes.reshape(s) for s in shapes)

    k_sq = (k_axes[0] ** 2 + k_axes[1] ** 2 + k_axes[2] ** 2).astype(np.float64)
    k_mag = np.sqrt(k_sq)
    k_sq_safe = k_sq.copy()
    k_sq_safe[0, 0, 0] = 1.0  # division guard; the k=0 mode is handled separately

    # i*k_j multipliers with the Nyquist plane of axis j zeroed (odd derivative).
    ik = []
    for axis in range(3):
        kk = k1d.copy()
        kk[n // 2] = 0.0
        ik.append((1j * kk).reshape(shapes[axis]))

    # 2/3-rule mask: keep the mode iff max_j |m_j| < n/3.
    keep1d = np.abs(modes) < n / 3.0
    dealias = (keep1d.reshape(shapes[0]) & keep1d.reshape(shapes[1])
               & keep1d.reshape(shapes[2]))

    for arr in (k_sq, k_sq_safe, k_mag, dealias, *ik):
        arr.flags.writeable = False
    return {"modes": modes, "k1d": k1d, "k_axes": k_axes, "m_axes": m_axes,
            "k_sq": k_sq, "k_sq_safe": k_sq_safe, "k_mag": k_mag,
            "ik": tuple(ik), "dealias": dealias}


def grid_wavenumbers(grid: GridSpec):
    return _wavenumbers(grid.n, grid.domain_length)


def _lock(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def fftn(a: np.ndarray, axes=None) -> np.ndarray:
    return scipy.fft.fftn(a, axes=axes, workers=_workers)


def ifftn(a: np.ndarray, axes=None) -> np.ndarray:
    return scipy.fft.ifftn(a, axes=axes, workers=_workers)


@dataclass(frozen=True)
class ScalarField:
    """One real-valued field, stored in physical or spectral representation.

    Data arrays are locked (read-only) on construction; operations always
    allocate fresh outputs, so fields are safe to share across threads.
    """

    grid: GridSpec
    rep: str
    data: np.ndarray

    def __post_init__(self):
        if self.rep not in (PHYSICAL, SPECTRAL):
            raise RepresentationError(f"unknown representation {self.rep!r}")
        want = np.float64 if self.rep == PHYSICAL else np.complex128
        data = np.ascontiguousarray(self.data, dtype=want)
        if data.shape != self.grid.shape:
            raise GridMismatchError(
                f"data shape {data.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "data", _lock(data))

    def to_spectral(self) -> "ScalarField":
        if self.rep == SPECTRAL:
            return self
        return ScalarField(self.grid, SPECTRAL, fftn(self.data))

    def to_physical(self) -> "ScalarField":
        if self.rep == PHYSICAL:
            return self
        return ScalarField(self.grid, PHYSICAL, ifftn(self.data).real)

    def mean(self) -> float:
        if self.rep == PHYSICAL:
            return float(np.mean(self.data))
        return float(self.data.flat[0].real) / self.grid.n ** 3

    def rms(self) -> float:
        if self.rep == PHYSICAL:
            return float(np.sqrt(np.mean(self.data ** 2)))
        n3 = self.grid.n ** 3
        return float(np.sqrt(np.sum(np.abs(self.data) ** 2) / n3 ** 2))


def transform(f: ScalarField, direction: str) -> ScalarField:
    """Strict transform: the input representation must match ``direction``.

    ``to_spectral`` expects a physical field, ``to_physical`` a spectral one;
    anything else raises :class:`RepresentationError`.
    """
    if direction == "to_spectral":
        if f.rep != PHYSICAL:
            raise RepresentationError("to_spectral requires a physical field")
        return f.to_spectral()
    if direction == "to_physical":
        if f.rep != SPECTRAL:
            raise RepresentationError("to_physical requires a spectral field")
        return f.to_physical()
    raise RepresentationError(f"unknown transform direction {direction!r}")


@dataclass(frozen=True)
class VectorField:
    """Three scalar components sharing one grid and one representation."""

    components: tuple[ScalarField, ScalarField, ScalarField]

    def __post_init__(self):
        c = self.components
        if len(c) != 3:
            raise GridMismatchError("vector field needs exactly 3 components")
        if any(ci.grid != c[0].grid or ci.rep != c[0].rep for ci in c[1:]):
            raise GridMismatchError("vector components must share grid and representation")
        object.__setattr__(self, "components", tuple(c))

    @classmethod
    def from_arrays(cls, grid: GridSpec, rep: str, arrays) -> "VectorField":
        return cls(tuple(ScalarField(grid, rep, a) for a in arrays))

    @property
    def grid(self) -> GridSpec:
        return self.components[0].grid

    @property
    def rep(self) -> str:
        return self.components[0].rep

    def component(self, i: int) -> ScalarField:
        return self.components[i]

    def as_array(self) -> np.ndarray:
        return np.stack([c.data for c in self.components])

    def to_spectral(self) -> "VectorField":
        return VectorField(tuple(c.to_spectral() for c in self.components))

    def to_physical(self) -> "VectorField":
        return VectorField(tuple(c.to_physical() for c in self.components))

    def shift_uniform(self, shift) -> "VectorField":
        """Return the field with a constant vector added (Galilean shift)."""
        phys = self.to_physical()
        return VectorField.from_arrays(
            self.grid, PHYSICAL,
            [phys.components[i].data + float(shift[i]) for i in range(3)])


@dataclass(frozen=True)
class SymmetricTensorField:
    """Six scalar components (11, 12, 13, 22, 23, 33) on a shared grid."""

    components: tuple[ScalarField, ...]

    def __post_init__(self):
        c = self.components
        if len(c) != 6:
            raise GridMismatchError("symmetric tensor needs exactly 6 components")
        if any(ci.grid != c[0].grid or ci.rep != c[0].rep for ci in c[1:]):
            raise GridMismatchError("tensor components must share grid and representation")
        object.__setattr__(self, "components", tuple(c))

    @classmethod
    def from_arrays(cls, grid: GridSpec, rep: str, arrays) -> "SymmetricTensorField":
        return cls(tuple(ScalarField(grid, rep, a) for a in arrays))

    @property
    def grid(self) -> GridSpec:
        return self.components[0].grid

    @property
    def rep(self) -> str:
        return self.components[0].rep

    def component(self, i: int, j: int) -> ScalarField:
        return self.components[_TENSOR_INDEX[(i, j)]]

    def as_array(self) -> np.ndarray:
        return np.stack([c.data for c in self.components])

    def to_physical(self) -> "SymmetricTensorField":
        return SymmetricTensorField(tuple(c.to_physical() for c in self.components))

    def to_spectral(self) -> "SymmetricTensorField":
        return SymmetricTensorField(tuple(c.to_spectral() for c in self.components))


def gradient(f: ScalarField) -> VectorField:
    """Spectral gradient; Nyquist derivative coefficients are zeroed."""
    w = grid_wavenumbers(f.grid)
    fh = f.to_spectral().data
    comps = []
    for axis in range(3):
        gh = ScalarField(f.grid, SPECTRAL, w["ik"][axis] * fh)
        comps.append(gh if f.rep == SPECTRAL else gh.to_physical())
    return VectorField(tuple(comps))


def divergence(v: VectorField) -> ScalarField:
    """Spectral divergence with the gradient's Nyquist convention."""
    w = grid_wavenumbers(v.grid)
    acc = np.zeros(v.grid.shape, dtype=np.complex128)
    for axis in range(3):
        acc += w["ik"][axis] * v.components[axis].to_spectral().data
    out = ScalarField(v.grid, SPECTRAL, acc)
    return out if v.rep == SPECTRAL else out.to_physical()


def laplacian(f: ScalarField) -> ScalarField:
    """Spectral Laplacian (multiplier ``-|k|**2``, no Nyquist special-casing)."""
    w = grid_wavenumbers(f.grid)
    out = ScalarField(f.grid, SPECTRAL, -w["k_sq"] * f.to_spectral().data)
    return out if f.rep == SPECTRAL else out.to_physical()


def strain_rate(v: VectorField, paper_convention: bool = False) -> SymmetricTensorField:
    """Strain-rate tensor ``S_ij = (d_j v_i + d_i v_j) / 2``.

    ``paper_convention=True`` drops the 1/2 (returns the unsymmetrized-scale
    tensor ``d_j v_i + d_i v_j``).
    """
    w = grid_wavenumbers(v.grid)
    vh = [c.to_spectral().data for c in v.components]
    scale = 1.0 if paper_convention else 0.5
    comps = []
    for (i, j) in TENSOR_COMPONENTS:
        sh = scale * (w["ik"][j] * vh[i] + w["ik"][i] * vh[j])
        c = ScalarField(v.grid, SPECTRAL, sh)
        comps.append(c if v.rep == SPECTRAL else c.to_physical())
    return SymmetricTensorField(tuple(comps))


def tensor_divergence(t: SymmetricTensorField) -> VectorField:
    """Row divergence ``(div T)_i = d_j T_ij`` of a symmetric tensor."""
    w = grid_wavenumbers(t.grid)
    th = [c.to_spectral().data for c in t.components]
    comps = []
    for i in range(3):
        acc = np.zeros(t.grid.shape, dtype=np.complex128)
        for j in range(3):
            acc += w["ik"][j] * th[_TENSOR_INDEX[(i, j)]]
        c = ScalarField(t.grid, SPECTRAL, acc)
        comps.append(c if t.rep == SPECTRAL else c.to_physical())
    return VectorField(tuple(comps))


def dealias_mask(grid: GridSpec) -> np.ndarray:
    """Boolean 2/3-rule mask: True iff ``max_j |k_j| < (n/3) * (2*pi/L)``."""
    return grid_wavenumbers(grid)["dealias"]


def apply_dealias(f: ScalarField) -> ScalarField:
    mask = dealias_mask(f.grid)
    out = ScalarField(f.grid, SPECTRAL, np.where(mask, f.to_spectral().data, 0.0))
    return out if f.rep == SPECTRAL else out.to_physical()


def project_solenoidal(v: VectorField) -> VectorField:
    """Leray projection onto divergence-free fields (k=0 mode untouched)."""
    w = grid_wavenumbers(v.grid)
    vh = np.stack([c.to_spectral().data for c in v.components])
    vh = _project_solenoidal_raw(vh, w)
    out = VectorField.from_arrays(v.grid, SPECTRAL, list(vh))
    return out if v.rep == SPECTRAL else out.to_physical()


def _project_solenoidal_raw(vh: np.ndarray, w, in_place: bool = False) -> np.ndarray:
    """In-spectral-space Leray projector on a (3, n, n, n) stack."""
    k = w["k_axes"]
    kdotv = k[0] * vh[0]
    kdotv += k[1] * vh[1]
    kdotv += k[2] * vh[2]
    kdotv /= w["k_sq_safe"]
    out = vh if in_place else vh.copy()
    for i in range(3):
        out[i] -= k[i] * kdotv
    return out
