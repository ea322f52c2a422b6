"""VFLD1 binary field files.

Layout: one UTF-8 JSON header line terminated by ``\\n``, then
``ncomp * n**3`` little-endian float64 values, component-major, each
component C-ordered over (x, y, z) with z fastest.  Required header keys:
``magic`` ("VFLD1"), ``n``, ``lx``, ``ncomp`` (1, 3 or 6), ``dtype``
("f64le") and ``order``.  ``time``, ``nu`` and ``seed`` are carried when
known; readers ignore unknown keys.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import FileFormatError
from .grid import (PHYSICAL, GridSpec, ScalarField, SymmetricTensorField,
                   VectorField)

MAGIC = "VFLD1"
DTYPE = "f64le"
ORDER = "comp,x,y,z(z-fastest)"


def _components(obj) -> list[np.ndarray]:
    if isinstance(obj, ScalarField):
        return [obj.to_physical().data]
    return [c.to_physical().data for c in obj.components]


def write_field(path, obj, time: float | None = None, nu: float | None = None,
                seed: int | None = None) -> None:
    """Write a Scalar/Vector/SymmetricTensor field as a VFLD1 file."""
    comps = _components(obj)
    grid = obj.grid if not isinstance(obj, ScalarField) else obj.grid
    header = {"magic": MAGIC, "n": grid.n, "lx": grid.domain_length,
              "ncomp": len(comps), "dtype": DTYPE, "order": ORDER}
    if time is not None:
        header["time"] = float(time)
    if nu is not None:
        header["nu"] = float(nu)
    if seed is not None:
        header["seed"] = int(seed)
    with open(path, "wb") as fh:
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode("utf-8"))
        for c in comps:
            fh.write(np.ascontiguousarray(c, dtype="<f8").tobytes())


def read_header(path) -> dict:
    with open(path, "rb") as fh:
        line = fh.readline()
    try:
        header = json.loads(line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FileFormatError(f"{path}: unreadable VFLD1 header") from exc
    if header.get("magic") != MAGIC:
        raise FileFormatError(f"{path}: bad magic {header.get('magic')!r}")
    if header.get("dtype") != DTYPE:
        raise FileFormatError(f"{path}: unsupported dtype {header.get('dtype')!r}")
    if header.get("ncomp") not in (1, 3, 6):
        raise FileFormatError(f"{path}: ncomp must be 1, 3 or 6")
    return header


def read_field(path):
    """Read a VFLD1 file; returns (field, header).

    The field type follows ``ncomp``: ScalarField, VectorField or
    SymmetricTensorField, always in physical representation.
    """
    header = read_header(path)
    n, ncomp = int(header["n"]), int(header["ncomp"])
    grid = GridSpec(n=n, domain_length=float(header.get("lx", 2.0 * np.pi)))
    want = ncomp * n ** 3
    with open(path, "rb") as fh:
        fh.readline()
        raw = np.fromfile(fh, dtype="<f8", count=want)
    if raw.size != want:
        raise FileFormatError(f"{path}: expected {want} values, got {raw.size}")
    comps = raw.reshape(ncomp, n, n, n)
    if ncomp == 1:
        return ScalarField(grid, PHYSICAL, comps[0]), header
    if ncomp == 3:
        return VectorField.from_arrays(grid, PHYSICAL, list(comps)), header
    return SymmetricTensorField.from_arrays(grid, PHYSICAL, list(comps)), header
