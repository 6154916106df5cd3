"""Helmholtz solvers built on the travel-time/amplitude splitting: factored
eikonal fast marching plus Krylov-accelerated multigrid for the amplitude
advection-diffusion-reaction system, next to the shifted-Laplacian baseline."""

from .grid import (
    GridSpec,
    Medium,
    SourceSpec,
    attenuation_layer,
    downsample,
    make_grid,
    point_source,
    points_per_wavelength,
    relative_error_map,
)
from .models import generate_model, load_model, load_model_raw, read_field, write_field
from .eikonal import (
    AnalyticBase,
    TravelTime,
    compute_travel_time,
    factored_update_root,
    fast_march,
    local_update,
    tau_derivatives,
)

__all__ = [
    "GridSpec",
    "Medium",
    "SourceSpec",
    "AnalyticBase",
    "TravelTime",
    "make_grid",
    "point_source",
    "points_per_wavelength",
    "attenuation_layer",
    "downsample",
    "relative_error_map",
    "generate_model",
    "load_model",
    "load_model_raw",
    "read_field",
    "write_field",
    "fast_march",
    "local_update",
    "factored_update_root",
    "tau_derivatives",
    "compute_travel_time",
]
