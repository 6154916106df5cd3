"""Geometric multigrid: bilinear prolongation, Galerkin coarse operators,
and the Krylov-cycle (W-cycle-shaped recursion with inner FGMRES(2) coarse
solves and an inexact coarsest-grid solve)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .grid import GridSpec
from .krylov import KrylovConfig, _gmres_relax_pre, fgmres

COARSE_GMRES_STEPS = 10
COARSE_FGMRES_TOL = 0.1


def _prolongation_1d(n_fine: int) -> sp.csr_matrix:
    """Nodal 1D linear interpolation from (n_fine-1)/2 + 1 coarse nodes."""
    if (n_fine - 1) % 2:
        raise ValueError(f"cannot coarsen {n_fine} nodes: interval count is odd")
    n_coarse = (n_fine - 1) // 2 + 1
    rows, cols, vals = [], [], []
    for i in range(n_fine):
        if i % 2 == 0:
            rows.append(i)
            cols.append(i // 2)
            vals.append(1.0)
        else:
            rows.extend((i, i))
            cols.extend((i // 2, i // 2 + 1))
            vals.extend((0.5, 0.5))
    return sp.csr_matrix((vals, (rows, cols)), shape=(n_fine, n_coarse))


def build_prolongation(fine_shape: tuple[int, int]) -> sp.csr_matrix:
    """2D bilinear prolongation as the tensor product of 1D interpolations.

    Coincident nodes get weight 1, edge midpoints (1/2, 1/2), cell centers
    (1/4, 1/4, 1/4, 1/4); every row sums to 1.  Restriction is P^T.
    """
    n1, n2 = fine_shape
    P = sp.kron(_prolongation_1d(n1), _prolongation_1d(n2)).tocsr()
    P.sort_indices()
    return P


def galerkin_coarsen(A: sp.spmatrix, P: sp.spmatrix) -> sp.csr_matrix:
    """Coarse operator P^T A P."""
    if A.shape[1] != P.shape[0]:
        raise ValueError(f"dimension mismatch: A {A.shape}, P {P.shape}")
    Ac = (P.T @ (A @ P)).tocsr()
    Ac.sort_indices()
    return Ac


@dataclass
class MGHierarchy:
    """Per-level operators and transfer operators, finest first (level 1).

    Level l runs l+1 pre- and post-relaxations (one Jacobi-preconditioned
    GMRES run of that length); the coarsest level gets 10 such steps instead
    of a direct solve.
    """

    ops: list
    prols: list
    shapes: list
    inv_diags: list = field(default_factory=list)
    coarse_steps: int = COARSE_GMRES_STEPS
    coarse_tol: float = COARSE_FGMRES_TOL

    def __post_init__(self):
        if not self.inv_diags:
            self.inv_diags = []
            for A in self.ops:
                d = A.diagonal()
                if np.any(d == 0):
                    raise ValueError("hierarchy operator has zero diagonal entries")
                self.inv_diags.append(1.0 / d)

    @property
    def n_levels(self) -> int:
        return len(self.ops)

    def relax_steps(self, level: int) -> int:
        return level + 1

    def summary(self) -> str:
        lines = []
        for l, (A, shape) in enumerate(zip(self.ops, self.shapes), start=1):
            relax = f"{self.relax_steps(l)} pre/post" if l < self.n_levels else f"{self.coarse_steps} coarsest"
            lines.append(f"level {l}: grid {shape[0]}x{shape[1]}, nnz {A.nnz}, relax {relax}")
        return "\n".join(lines)


def coarsenable_levels(shape: tuple[int, int], max_levels: int) -> list[tuple[int, int]]:
    """Grid sizes for each achievable level: halve while interval counts stay
    even and every coarse dimension keeps at least 3 nodes."""
    shapes = [shape]
    while len(shapes) < max_levels:
        m1, m2 = shapes[-1]
        if (m1 - 1) % 2 or (m2 - 1) % 2:
            break
        c1, c2 = (m1 - 1) // 2 + 1, (m2 - 1) // 2 + 1
        if c1 < 3 or c2 < 3:
            break
        shapes.append((c1, c2))
    return shapes


def build_hierarchy(A0: sp.spmatrix, grid: GridSpec, max_levels: int = 5) -> MGHierarchy:
    """Chain of Galerkin operators A_{l+1} = P_l^T A_l P_l under bilinear P."""
    if A0.shape[0] != grid.n_nodes:
        raise ValueError("operator dimension does not match the grid")
    shapes = coarsenable_levels(grid.shape, max_levels)
    if len(shapes) < 2:
        raise ValueError(
            f"grid {grid.shape} cannot support two multigrid levels "
            f"((n_d - 1) must be even with at least 3 coarse nodes)"
        )
    ops = [A0.tocsr()]
    prols = []
    for fine_shape in shapes[:-1]:
        P = build_prolongation(fine_shape)
        prols.append(P)
        ops.append(galerkin_coarsen(ops[-1], P))
    return MGHierarchy(ops=ops, prols=prols, shapes=shapes)


def k_cycle(hier: MGHierarchy, level: int, b: np.ndarray, x: np.ndarray, stats: dict | None = None):
    """One Krylov-cycle at the given level (1 = finest).

    Pre-relax, restrict the residual, solve the coarse problem with
    FGMRES(2) preconditioned by the recursive cycle (10 Jacobi-GMRES steps
    on the coarsest level), correct, post-relax.  The inner FGMRES exits
    early once the coarse relative residual drops below 0.1, which on
    average makes the recursion cheaper than a strict W-cycle.
    """
    if not 1 <= level <= hier.n_levels:
        raise ValueError(f"level {level} outside 1..{hier.n_levels}")
    if stats is not None:
        stats[level] = stats.get(level, 0) + 1
    A = hier.ops[level - 1]
    invd = hier.inv_diags[level - 1]
    steps = hier.relax_steps(level)

    x = _gmres_relax_pre(A, invd, b, x, steps)
    P = hier.prols[level - 1]
    rc = P.T @ (b - A @ x)

    if level + 1 == hier.n_levels:
        ec = _gmres_relax_pre(
            hier.ops[level], hier.inv_diags[level], rc, np.zeros_like(rc), hier.coarse_steps
        )
        if stats is not None:
            stats[level + 1] = stats.get(level + 1, 0) + 1
    else:
        cfg = KrylovConfig(restart=2, maxiter=2, tol=hier.coarse_tol)
        ec, _ = fgmres(
            hier.ops[level],
            rc,
            x0=None,
            precond=lambda v: k_cycle(hier, level + 1, v, np.zeros_like(v), stats),
            cfg=cfg,
        )

    x = x + P @ ec
    x = _gmres_relax_pre(A, invd, b, x, steps)
    return x


def make_kcycle_preconditioner(hier: MGHierarchy):
    """Preconditioner callable: one k_cycle from zero per application.

    The result varies between applications (inner GMRES runs), so it must be
    paired with a *flexible* outer Krylov method.
    """

    def apply(r: np.ndarray) -> np.ndarray:
        return k_cycle(hier, 1, r, np.zeros_like(r))

    return apply
