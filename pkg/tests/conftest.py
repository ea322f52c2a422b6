import numpy as np
import pytest

from fraclest import (GridSpec, PHYSICAL, ScalarField, VectorField,
                      apply_dealias, project_solenoidal, set_num_threads)

set_num_threads(2)


def rel_err(got, want):
    got, want = np.asarray(got), np.asarray(want)
    scale = np.max(np.abs(want))
    if scale == 0:
        return np.max(np.abs(got))
    return np.max(np.abs(got - want)) / scale


@pytest.fixture
def grid8():
    return GridSpec(8)


@pytest.fixture
def grid16():
    return GridSpec(16)


@pytest.fixture
def grid32():
    return GridSpec(32)


def random_field(grid, seed, cutoff_limited=True):
    """Seeded random scalar field, spectrally confined like solver fields."""
    rng = np.random.Generator(np.random.Philox(seed))
    f = ScalarField(grid, PHYSICAL, rng.standard_normal(grid.shape))
    return apply_dealias(f) if cutoff_limited else f


def random_vector(grid, seed, solenoidal=False, zero_mean=True):
    comps = [random_field(grid, seed + i) for i in range(3)]
    v = VectorField(tuple(comps))
    if zero_mean:
        v = VectorField.from_arrays(
            grid, PHYSICAL, [c.data - c.mean() for c in v.to_physical().components])
    if solenoidal:
        v = project_solenoidal(v)
    return v.to_physical()
