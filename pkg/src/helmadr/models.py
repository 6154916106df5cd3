"""Analytic squared-slowness test models and raw model/field file I/O.

Model formulas are evaluated in normalized coordinates xi_d = x_d/L_d in
[0, 1], so each model extends naturally to non-square domains.

File formats:

* raw model: little-endian float64, row-major, no header, interpreted as
  velocity v (kappa^2 = 1/v^2); sidecar ``<path>.meta`` text file with
  ``key=value`` lines for n1, n2, L1, L2.
* field dump: little-endian float64, row-major; complex fields interleave
  (re, im) pairs and set ``complex=true`` in the sidecar.
"""

from __future__ import annotations

import os

import numpy as np

from .grid import GridSpec, Medium

MODEL_KINDS = ("constant", "linear", "gaussian", "waveguide", "wedge")


def generate_model(kind: str, grid: GridSpec, params: dict | None = None) -> Medium:
    """Build one of the closed-form kappa^2 models; gamma starts at zero."""
    params = dict(params or {})
    x1, x2 = grid.coords()
    xi1 = x1 / grid.L1
    xi2 = x2 / grid.L2

    if kind == "constant":
        value = float(params.pop("value", 1.0))
        if value <= 0:
            raise ValueError("constant model needs value > 0")
        ksq = np.full(grid.shape, value)
    elif kind == "linear":
        top = float(params.pop("top", 0.4))
        bottom = float(params.pop("bottom", 0.08))
        if top <= 0 or bottom <= 0:
            raise ValueError("linear model needs positive top/bottom kappa^2")
        ksq = top + (bottom - top) * xi2
    elif kind == "gaussian":
        s1 = float(params.pop("sigma1", 4.0))
        s2 = float(params.pop("sigma2", 8.0))
        ksq = np.exp(-(s1 * (xi1 - 0.5) ** 2 + s2 * (xi2 - 0.5) ** 2))
    elif kind == "waveguide":
        v = np.exp(1.25 * (1.0 - 0.4 * np.exp(-32.0 * (xi1 - 0.5) ** 2)))
        ksq = 1.0 / v**2
    elif kind == "wedge":
        # Top half: smoothed step across the line 4*x2 - x1 = 0.75; bottom
        # half mirrors the top about x2 = 1/2.
        xi2_fold = np.where(xi2 <= 0.5, xi2, 1.0 - xi2)
        ksq = 0.25 * np.tanh((4.0 * xi2_fold - xi1 - 0.75) * 20.0) + 0.75
    else:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")

    if params:
        raise ValueError(f"unknown parameters for model {kind!r}: {sorted(params)}")
    return Medium(grid, ksq)


def load_model_raw(grid: GridSpec, path: str) -> Medium:
    """Read velocities from a headerless little-endian float64 file."""
    v = np.fromfile(path, dtype="<f8")
    if v.size != grid.n_nodes:
        raise ValueError(
            f"model file {path!r} holds {v.size} values, grid needs {grid.n_nodes}"
        )
    if np.min(v) <= 0:
        raise ValueError(f"model file {path!r} contains non-positive velocities")
    return Medium(grid, (1.0 / v**2).reshape(grid.shape))


def _meta_path(path: str) -> str:
    return path + ".meta" if not path.endswith(".meta") else path


def write_meta(path: str, grid: GridSpec, complex_: bool) -> None:
    with open(_meta_path(path), "w", encoding="ascii") as fh:
        fh.write(f"n1={grid.n1}\n")
        fh.write(f"n2={grid.n2}\n")
        fh.write(f"L1={grid.L1!r}\n")
        fh.write(f"L2={grid.L2!r}\n")
        fh.write(f"complex={'true' if complex_ else 'false'}\n")


def read_meta(path: str) -> tuple[GridSpec, bool]:
    entries = {}
    with open(_meta_path(path), encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            entries[key.strip()] = value.strip()
    grid = GridSpec(int(entries["n1"]), int(entries["n2"]), float(entries["L1"]), float(entries["L2"]))
    return grid, entries.get("complex", "false").lower() == "true"


def write_field(path: str, grid: GridSpec, values: np.ndarray) -> None:
    """Dump a nodal field with its .meta sidecar (complex interleaves re/im)."""
    values = np.asarray(values)
    if values.shape != grid.shape:
        raise ValueError(f"field shape {values.shape} does not match grid {grid.shape}")
    complex_ = np.iscomplexobj(values)
    if complex_:
        flat = np.empty(2 * grid.n_nodes)
        flat[0::2] = values.real.reshape(-1)
        flat[1::2] = values.imag.reshape(-1)
    else:
        flat = values.astype(np.float64).reshape(-1)
    flat.astype("<f8").tofile(path)
    write_meta(path, grid, complex_)


def read_field(path: str) -> tuple[np.ndarray, GridSpec]:
    grid, complex_ = read_meta(path)
    flat = np.fromfile(path, dtype="<f8")
    n = grid.n_nodes
    if complex_:
        if flat.size != 2 * n:
            raise ValueError(f"field file {path!r} holds {flat.size} floats, expected {2*n}")
        values = (flat[0::2] + 1j * flat[1::2]).reshape(grid.shape)
    else:
        if flat.size != n:
            raise ValueError(f"field file {path!r} holds {flat.size} floats, expected {n}")
        values = flat.reshape(grid.shape)
    return values, grid


def load_model(path: str) -> tuple[Medium, GridSpec]:
    """Load a raw velocity model using its sidecar for the grid geometry."""
    if not os.path.exists(_meta_path(path)):
        raise FileNotFoundError(f"missing sidecar {_meta_path(path)!r}")
    grid, _ = read_meta(path)
    return load_model_raw(grid, path), grid
