"""Factored eikonal travel times: analytic distance factor, fast marching,
and the gradient/Laplacian coefficient fields of the full travel time."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import _fmm
from .grid import GridSpec, Medium, SourceSpec


class AnalyticBase:
    """Distance factor tau0 = |x - x0| and its analytic derivatives.

    grad(tau0) = (x - x0)/|x - x0| and lap(tau0) = 1/|x - x0| in 2D.  All
    three are zeroed at the source node itself, where they are singular;
    consumers apply their own source-node convention.
    """

    def __init__(self, grid: GridSpec, source: SourceSpec):
        source.validate(grid)
        self.grid = grid
        self.source = source
        self.x0 = source.position(grid)
        x1, x2 = grid.coords()
        d1 = x1 - self.x0[0]
        d2 = x2 - self.x0[1]
        r = np.hypot(d1, d2)
        self.tau0 = r
        with np.errstate(divide="ignore", invalid="ignore"):
            self.grad1 = np.where(r > 0, d1 / r, 0.0)
            self.grad2 = np.where(r > 0, d2 / r, 0.0)
            self.lap = np.where(r > 0, 1.0 / r, 0.0)


@dataclass
class TravelTime:
    """Travel time tau = tau0*tau1 with the coefficient fields the amplitude
    equation needs: grad(tau) components and lap(tau)."""

    grid: GridSpec
    tau1: np.ndarray
    tau: np.ndarray
    grad1: np.ndarray
    grad2: np.ndarray
    lap: np.ndarray
    base: AnalyticBase | None = None
    fm_time: float = 0.0

    @classmethod
    def zeros(cls, grid: GridSpec) -> "TravelTime":
        """Degenerate zero travel time (tau = 0 retains the Helmholtz system)."""
        z = np.zeros(grid.shape)
        return cls(grid, z.copy(), z.copy(), z.copy(), z.copy(), z.copy())

    @property
    def grad_sq(self) -> np.ndarray:
        return self.grad1**2 + self.grad2**2


def _order_int(order) -> int:
    if order in (1, "first"):
        return 1
    if order in (2, "second"):
        return 2
    raise ValueError(f"order must be 'first'/'second' (or 1/2), got {order!r}")


def fast_march(medium: Medium, grid: GridSpec, source: SourceSpec, order="second") -> np.ndarray:
    """Solve the factored eikonal equation by heap-ordered fast marching.

    Returns the factor tau1 (> 0 everywhere); the full travel time is
    tau0*tau1.  The source node and its 8 neighbors are seeded with the
    constant-medium value tau1 = kappa(x0) and accepted up front.
    """
    source.validate(grid)
    base = AnalyticBase(grid, source)
    tau1, _, _, _, naccept = _fmm._march(
        grid.n1,
        grid.n2,
        grid.h1,
        grid.h2,
        base.tau0.reshape(-1),
        base.grad1.reshape(-1),
        base.grad2.reshape(-1),
        medium.kappa.reshape(-1),
        source.i1,
        source.i2,
        _order_int(order),
    )
    if naccept != grid.n_nodes:
        raise RuntimeError(
            f"fast marching accepted {naccept} of {grid.n_nodes} nodes; "
            f"the update graph should be connected for positive kappa"
        )
    return tau1.reshape(grid.shape)


def fast_march_debug(medium: Medium, grid: GridSpec, source: SourceSpec, order="second"):
    """fast_march variant that also returns the acceptance record
    (node indices and travel times in acceptance order) for property tests."""
    source.validate(grid)
    base = AnalyticBase(grid, source)
    tau1, tau, order_idx, order_tau, naccept = _fmm._march(
        grid.n1,
        grid.n2,
        grid.h1,
        grid.h2,
        base.tau0.reshape(-1),
        base.grad1.reshape(-1),
        base.grad2.reshape(-1),
        medium.kappa.reshape(-1),
        source.i1,
        source.i2,
        _order_int(order),
    )
    return tau1.reshape(grid.shape), tau.reshape(grid.shape), order_idx, order_tau, naccept


def factored_update_root(p: np.ndarray, q: np.ndarray, kappa: float) -> float | None:
    """Larger real root of sum_d (p_d*t + q_d)^2 = kappa^2 or None.

    This is the scalar quadratic each fast-marching node update solves once
    the one-sided differences are frozen into (p, q) pairs.
    """
    p = np.atleast_1d(np.asarray(p, dtype=float))
    q = np.atleast_1d(np.asarray(q, dtype=float))
    A = float(p @ p)
    B = 2.0 * float(p @ q)
    C = float(q @ q) - kappa**2
    ok, t = _fmm._larger_root(A, B, C)
    return float(t) if ok else None


def local_update(
    grid: GridSpec,
    medium: Medium,
    base: AnalyticBase,
    node: tuple[int, int],
    tau1: np.ndarray,
    accepted: np.ndarray,
    order="second",
) -> float:
    """One fast-marching node update: candidate tau1 at ``node`` computed from
    the accepted neighbor values (upwind one-sided differences, larger
    quadratic root, causality fallbacks)."""
    i1, i2 = node
    acc = np.asarray(accepted, dtype=bool)
    if not (
        (i1 > 0 and acc[i1 - 1, i2])
        or (i1 < grid.n1 - 1 and acc[i1 + 1, i2])
        or (i2 > 0 and acc[i1, i2 - 1])
        or (i2 < grid.n2 - 1 and acc[i1, i2 + 1])
    ):
        raise ValueError("local_update needs at least one accepted axis neighbor")
    usable = np.where(acc, _fmm.ACCEPTED, _fmm.FAR).astype(np.uint8)
    tau1f = np.asarray(tau1, dtype=float).reshape(-1)
    tauf = base.tau0.reshape(-1) * tau1f
    t = _fmm._node_candidate(
        i1 * grid.n2 + i2,
        grid.n1,
        grid.n2,
        grid.h1,
        grid.h2,
        base.tau0.reshape(-1),
        base.grad1.reshape(-1),
        base.grad2.reshape(-1),
        medium.kappa.reshape(-1),
        tau1f,
        tauf,
        usable.reshape(-1),
        _order_int(order),
    )
    return float(t)


def _diff1(t: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Central first derivative, first-order one-sided on the boundaries."""
    d = np.empty_like(t)
    tt = np.moveaxis(t, axis, 0)
    dd = np.moveaxis(d, axis, 0)
    dd[1:-1] = (tt[2:] - tt[:-2]) / (2.0 * h)
    dd[0] = (tt[1] - tt[0]) / h
    dd[-1] = (tt[-1] - tt[-2]) / h
    return d


def _diff2(t: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Second derivative: 3-point interior, one-sided second-order 4-point on
    the boundaries (no natural boundary conditions for tau)."""
    d = np.empty_like(t)
    tt = np.moveaxis(t, axis, 0)
    dd = np.moveaxis(d, axis, 0)
    h2 = h * h
    dd[1:-1] = (tt[2:] - 2.0 * tt[1:-1] + tt[:-2]) / h2
    dd[0] = (2.0 * tt[0] - 5.0 * tt[1] + 4.0 * tt[2] - tt[3]) / h2
    dd[-1] = (2.0 * tt[-1] - 5.0 * tt[-2] + 4.0 * tt[-3] - tt[-4]) / h2
    return d


def tau_derivatives(
    tau1: np.ndarray, base: AnalyticBase, grid: GridSpec
) -> tuple[tuple[np.ndarray, np.ndarray], np.ndarray]:
    """Assemble grad(tau) and lap(tau) from the computed factor tau1.

    Chain rule on tau = tau0*tau1 with analytic tau0 derivatives and finite
    differences for tau1.  At the source node, where tau0's derivatives are
    singular, the convention is grad(tau) = 0 and lap(tau) = 2*tau1(x0)
    (= 2*kappa(x0) for a fast-marching tau1).
    """
    dt1_1 = _diff1(tau1, grid.h1, 0)
    dt1_2 = _diff1(tau1, grid.h2, 1)
    lap1 = _diff2(tau1, grid.h1, 0) + _diff2(tau1, grid.h2, 1)

    grad1 = base.tau0 * dt1_1 + tau1 * base.grad1
    grad2 = base.tau0 * dt1_2 + tau1 * base.grad2
    lap = tau1 * base.lap + 2.0 * (base.grad1 * dt1_1 + base.grad2 * dt1_2) + base.tau0 * lap1

    i1, i2 = base.source.i1, base.source.i2
    grad1[i1, i2] = 0.0
    grad2[i1, i2] = 0.0
    lap[i1, i2] = 2.0 * tau1[i1, i2]
    return (grad1, grad2), lap


def compute_travel_time(
    medium: Medium, grid: GridSpec, source: SourceSpec, order="second"
) -> TravelTime:
    """fast_march + tau_derivatives, packaged for the solver drivers."""
    t0 = time.perf_counter()
    tau1 = fast_march(medium, grid, source, order)
    fm_time = time.perf_counter() - t0
    base = AnalyticBase(grid, source)
    (grad1, grad2), lap = tau_derivatives(tau1, base, grid)
    tau = base.tau0 * tau1
    return TravelTime(grid, tau1, tau, grad1, grad2, lap, base, fm_time)
