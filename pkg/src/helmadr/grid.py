"""Nodal 2D grid geometry, media, sources, and field utilities.

Conventions used throughout the package:

* Scalar fields are numpy arrays of shape ``(n1, n2)`` (C order).  The
  flattened index ``k = i1*n2 + i2`` matches the row ordering of all
  assembled sparse operators.
* The first coordinate ``x1 = i1*h1`` is the lateral direction, the second
  coordinate ``x2 = i2*h2`` is depth.  "Top" is the row ``i2 = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SIDES = ("top", "bottom", "left", "right")


@dataclass(frozen=True)
class GridSpec:
    """Regular nodal grid on the rectangle [0, L1] x [0, L2]."""

    n1: int
    n2: int
    L1: float
    L2: float

    def __post_init__(self):
        if self.n1 < 5 or self.n2 < 5:
            raise ValueError(f"grid needs at least 5 nodes per dimension, got {self.n1}x{self.n2}")
        if self.L1 <= 0 or self.L2 <= 0:
            raise ValueError(f"domain lengths must be positive, got ({self.L1}, {self.L2})")

    @property
    def h1(self) -> float:
        return self.L1 / (self.n1 - 1)

    @property
    def h2(self) -> float:
        return self.L2 / (self.n2 - 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n1, self.n2)

    @property
    def n_nodes(self) -> int:
        return self.n1 * self.n2

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodal coordinates as two (n1, n2) arrays."""
        x1 = np.linspace(0.0, self.L1, self.n1)
        x2 = np.linspace(0.0, self.L2, self.n2)
        return np.meshgrid(x1, x2, indexing="ij")


def make_grid(n1: int, n2: int, L1: float, L2: float) -> GridSpec:
    """Build a GridSpec with spacings h_d = L_d/(n_d - 1).

    Multigrid divisibility of (n_d - 1) is checked at hierarchy build time,
    not here.
    """
    return GridSpec(int(n1), int(n2), float(L1), float(L2))


def check_field(grid: GridSpec, values: np.ndarray, name: str = "field") -> np.ndarray:
    """Validate shape and finiteness of a nodal field; returns the array."""
    values = np.asarray(values)
    if values.shape != grid.shape:
        raise ValueError(f"{name} has shape {values.shape}, expected {grid.shape}")
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{name} contains non-finite values")
    return values


@dataclass
class Medium:
    """Squared slowness kappa^2 and attenuation gamma on a grid."""

    grid: GridSpec
    kappa_sq: np.ndarray
    gamma: np.ndarray = None

    def __post_init__(self):
        self.kappa_sq = check_field(self.grid, np.asarray(self.kappa_sq, dtype=np.float64), "kappa_sq")
        if np.min(self.kappa_sq) <= 0.0:
            raise ValueError("kappa_sq must be strictly positive everywhere")
        if self.gamma is None:
            self.gamma = np.zeros(self.grid.shape)
        self.gamma = check_field(self.grid, np.asarray(self.gamma, dtype=np.float64), "gamma")
        if np.min(self.gamma) < 0.0:
            raise ValueError("gamma must be non-negative")

    @property
    def kappa(self) -> np.ndarray:
        return np.sqrt(self.kappa_sq)


@dataclass(frozen=True)
class SourceSpec:
    """Point source at grid node (i1, i2) with angular frequency omega."""

    i1: int
    i2: int
    omega: float

    @property
    def f(self) -> float:
        return self.omega / (2.0 * np.pi)

    def validate(self, grid: GridSpec) -> None:
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        on_top = self.i2 == 0 and 0 <= self.i1 <= grid.n1 - 1
        interior = 1 <= self.i1 <= grid.n1 - 2 and 1 <= self.i2 <= grid.n2 - 2
        if not (on_top or interior):
            raise ValueError(
                f"source node ({self.i1}, {self.i2}) must be strictly inside the "
                f"grid or on the top boundary row"
            )

    def position(self, grid: GridSpec) -> tuple[float, float]:
        return (self.i1 * grid.h1, self.i2 * grid.h2)


def point_source(grid: GridSpec, source: SourceSpec) -> np.ndarray:
    """Discrete delta: 1/(h1*h2) at the source node, zero elsewhere.

    Integrates to one under the h1*h2 quadrature weight.
    """
    source.validate(grid)
    q = np.zeros(grid.shape, dtype=np.complex128)
    q[source.i1, source.i2] = 1.0 / (grid.h1 * grid.h2)
    return q


def attenuation_layer(grid: GridSpec, medium: Medium, source: SourceSpec, sides) -> Medium:
    """Quadratic sponge layers: gamma ramps from 0 to omega over one wavelength.

    The band width is one local wavelength 2*pi/(omega*kappa_bar) with the
    domain-mean kappa; gamma = omega*(d/W)^2 where d is the penetration depth
    measured from the band's inner edge.  Overlapping corners take the max.
    """
    sides = set(sides)
    unknown = sides - set(SIDES)
    if unknown:
        raise ValueError(f"unknown boundary sides: {sorted(unknown)}")
    omega = source.omega
    kappa_bar = float(np.mean(medium.kappa))
    width = 2.0 * np.pi / (omega * kappa_bar)
    if ("left" in sides or "right" in sides) and width > grid.L1 / 2:
        raise ValueError(f"attenuation band width {width:.3g} exceeds half the domain extent L1/2")
    if ("top" in sides or "bottom" in sides) and width > grid.L2 / 2:
        raise ValueError(f"attenuation band width {width:.3g} exceeds half the domain extent L2/2")

    x1, x2 = grid.coords()
    gamma = np.array(medium.gamma, copy=True)
    ramps = []
    if "left" in sides:
        ramps.append(width - x1)
    if "right" in sides:
        ramps.append(x1 - (grid.L1 - width))
    if "top" in sides:
        ramps.append(width - x2)
    if "bottom" in sides:
        ramps.append(x2 - (grid.L2 - width))
    for depth in ramps:
        d = np.clip(depth, 0.0, width)
        gamma = np.maximum(gamma, omega * (d / width) ** 2)
    return Medium(grid, medium.kappa_sq, gamma)


def relative_error_map(u: np.ndarray, u_ref: np.ndarray, floor: float | None = None) -> np.ndarray:
    """Pointwise relative error |u - u_ref| / |u_ref|.

    Entries with |u_ref| < floor are reported as absolute error scaled by
    1/floor.  Default floor: 1e-12 * max|u_ref|.
    """
    u = np.asarray(u)
    u_ref = np.asarray(u_ref)
    if u.shape != u_ref.shape:
        raise ValueError(f"grid mismatch: {u.shape} vs {u_ref.shape}")
    ref_mag = np.abs(u_ref)
    if floor is None:
        floor = 1e-12 * float(ref_mag.max())
    if floor < 0:
        raise ValueError("floor must be non-negative")
    denom = np.where(ref_mag < floor, floor, ref_mag)
    return np.abs(u - u_ref) / denom


def downsample(values: np.ndarray, grid: GridSpec, factor: int) -> tuple[np.ndarray, GridSpec]:
    """Nodal injection onto the grid with (n_d - 1)/factor + 1 nodes per dim."""
    factor = int(factor)
    if factor < 1:
        raise ValueError("factor must be >= 1")
    check_field(grid, values.real, "field")
    if (grid.n1 - 1) % factor or (grid.n2 - 1) % factor:
        raise ValueError(f"(n_d - 1) = ({grid.n1 - 1}, {grid.n2 - 1}) not divisible by factor {factor}")
    coarse = GridSpec((grid.n1 - 1) // factor + 1, (grid.n2 - 1) // factor + 1, grid.L1, grid.L2)
    return values[::factor, ::factor].copy(), coarse


def points_per_wavelength(grid: GridSpec, medium: Medium, omega: float) -> float:
    """Minimum resolution over the domain: 2*pi/(omega * max(kappa) * h)."""
    h = max(grid.h1, grid.h2)
    return 2.0 * np.pi / (omega * float(medium.kappa.max()) * h)
