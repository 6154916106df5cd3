"""Sparse assembly of the Helmholtz and amplitude (ADR) operators.

All operators are complex CSR matrices over the flattened nodal grid
(k = i1*n2 + i2).  The amplitude system discretizes

    lap(a) - 2i*w*grad(tau).grad(a) - i*w*lap(tau)*a
          - w^2*(|grad(tau)|^2 - kappa^2)*a - i*w*gamma*kappa^2*a = q_hat

with a five-point Laplacian, one of three advection schemes (central,
first/second-order upwind), a neighbor-averaging mass term for the
lap(tau) coefficient, and boundary conditions obtained from the Helmholtz
ones by the chain rule.  A zero travel time reproduces the Helmholtz
operator entrywise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .eikonal import TravelTime
from .grid import GridSpec, Medium

BC_KINDS = ("neumann", "sommerfeld")
ADR_SCHEMES = ("central", "upwind1", "upwind2")


@dataclass(frozen=True)
class BCSpec:
    """Boundary condition per side; attenuation rides on Medium.gamma."""

    top: str = "neumann"
    bottom: str = "sommerfeld"
    left: str = "sommerfeld"
    right: str = "sommerfeld"

    def __post_init__(self):
        for side in ("top", "bottom", "left", "right"):
            kind = getattr(self, side)
            if kind not in BC_KINDS:
                raise ValueError(f"{side} condition {kind!r} not in {BC_KINDS}")

    @classmethod
    def all_neumann(cls) -> "BCSpec":
        return cls("neumann", "neumann", "neumann", "neumann")

    @classmethod
    def all_sommerfeld(cls) -> "BCSpec":
        return cls("sommerfeld", "sommerfeld", "sommerfeld", "sommerfeld")


class _CooBuilder:
    def __init__(self, n: int):
        self.n = n
        self.rows: list[np.ndarray] = []
        self.cols: list[np.ndarray] = []
        self.vals: list[np.ndarray] = []

    def add(self, rows, cols, vals):
        rows = np.asarray(rows).reshape(-1)
        if rows.size == 0:
            return
        self.rows.append(rows.astype(np.int64))
        self.cols.append(np.asarray(cols).reshape(-1).astype(np.int64))
        self.vals.append(np.asarray(vals, dtype=np.complex128).reshape(-1))

    def tocsr(self) -> sp.csr_matrix:
        mat = sp.coo_matrix(
            (np.concatenate(self.vals), (np.concatenate(self.rows), np.concatenate(self.cols))),
            shape=(self.n, self.n),
        ).tocsr()
        mat.sum_duplicates()
        mat.sort_indices()
        return mat


def _side_bc(bc: BCSpec, axis: int, low: bool) -> str:
    if axis == 0:
        return bc.left if low else bc.right
    return bc.top if low else bc.bottom


def _laplacian_legs(acc, grid, omega, kappa, grad1, grad2, bc):
    """Five-point Laplacian with ghost elimination on the boundaries.

    Neumann ghosts mirror the inner neighbor and pick up the chain-rule term
    2i*w*(n.grad tau)/h on the diagonal; Sommerfeld ghosts come from the
    first-order one-sided normal derivative in n.grad u = i*w*kappa*u (plus
    n.grad tau for the amplitude system).
    """
    n1, n2 = grid.shape
    K = np.arange(n1 * n2).reshape(n1, n2)
    grads = (grad1, grad2)
    for axis, (h, stride, size) in enumerate(((grid.h1, n2, n1), (grid.h2, 1, n2))):
        inv_h2 = 1.0 / (h * h)
        idx = np.indices((n1, n2))[axis]
        # interior-reaching legs, valid wherever a neighbor exists
        m = idx >= 1
        acc.add(K[m], K[m] - stride, np.full(m.sum(), inv_h2))
        m = idx <= size - 2
        acc.add(K[m], K[m] + stride, np.full(m.sum(), inv_h2))
        acc.add(K, K, np.full(n1 * n2, -2.0 * inv_h2))
        # ghost elimination at both ends of this axis
        for low in (True, False):
            m = idx == 0 if low else idx == size - 1
            rows = K[m]
            inner = rows + stride if low else rows - stride
            ndtau = grads[axis][m]
            ndtau = -ndtau if low else ndtau  # outward normal component of grad(tau)
            kind = _side_bc(bc, axis, low)
            if kind == "neumann":
                acc.add(rows, inner, np.full(rows.size, inv_h2))
                acc.add(rows, rows, 2j * omega * ndtau / h)
            else:
                # absorbing Sommerfeld for the exp(-i*w*tau) wave family:
                # n.grad(u) + i*w*kappa*u = 0, chain-ruled to the amplitude as
                # n.grad(a) = i*w*(n.grad(tau) - kappa)*a
                acc.add(rows, rows, (1.0 + 1j * omega * h * (ndtau - kappa[m])) * inv_h2)


def _advection_legs(acc, grid, omega, grad, axis, scheme, near_source):
    """Advection term -2i*w*(dtau/dx_d)*(da/dx_d) for one axis.

    Central-difference rows fall back to the upwind chain on the boundary;
    upwind rows fall from second to first order one node from the boundary
    and to the in-grid one-sided difference in the (rare) inflow corner
    case.  Nodes one cell from the source keep the central stencil because
    grad(tau) changes sign there.
    """
    n1, n2 = grid.shape
    K = np.arange(n1 * n2).reshape(n1, n2)
    h, stride, size = (grid.h1, n2, n1) if axis == 0 else (grid.h2, 1, n2)
    idx = np.indices((n1, n2))[axis]
    c = grad
    F = -2j * omega * c

    central_ok = (idx >= 1) & (idx <= size - 2)
    if scheme == "central":
        use_central = central_ok
    else:
        use_central = central_ok & near_source
    chain = ~use_central
    chain_order = 1 if scheme == "upwind1" else 2

    m = use_central
    acc.add(K[m], K[m] + stride, F[m] / (2.0 * h))
    acc.add(K[m], K[m] - stride, -F[m] / (2.0 * h))

    for sgn in (1, -1):
        mc = chain & (c > 0 if sgn == 1 else c < 0)
        if not mc.any():
            continue
        up2_ok = (idx >= 2) if sgn == 1 else (idx <= size - 3)
        up1_ok = (idx >= 1) if sgn == 1 else (idx <= size - 2)
        m2 = mc & up2_ok if chain_order == 2 else np.zeros_like(mc)
        m1 = mc & up1_ok & ~m2
        m0 = mc & ~up1_ok
        s = sgn * stride
        if m2.any():
            acc.add(K[m2], K[m2], sgn * 3.0 * F[m2] / (2.0 * h))
            acc.add(K[m2], K[m2] - s, -sgn * 4.0 * F[m2] / (2.0 * h))
            acc.add(K[m2], K[m2] - 2 * s, sgn * F[m2] / (2.0 * h))
        if m1.any():
            acc.add(K[m1], K[m1], sgn * F[m1] / h)
            acc.add(K[m1], K[m1] - s, -sgn * F[m1] / h)
        if m0.any():
            acc.add(K[m0], K[m0], -sgn * F[m0] / h)
            acc.add(K[m0], K[m0] + s, sgn * F[m0] / h)


def _mass_average_legs(acc, grid, omega, lap_tau):
    """-i*w*lap(tau)*a with the neighbor-averaging mass form: 1/4 weight on
    each of the four axis neighbors, lumped onto the diagonal where a
    neighbor falls outside the grid."""
    n1, n2 = grid.shape
    K = np.arange(n1 * n2).reshape(n1, n2)
    G = -0.25j * omega * lap_tau
    for axis, (stride, size) in enumerate(((n2, n1), (1, n2))):
        idx = np.indices((n1, n2))[axis]
        for sgn in (1, -1):
            inside = (idx <= size - 2) if sgn == 1 else (idx >= 1)
            m = inside
            acc.add(K[m], K[m] + sgn * stride, G[m])
            m = ~inside
            acc.add(K[m], K[m], G[m])


def assemble_helmholtz(medium: Medium, grid: GridSpec, omega: float, bc: BCSpec) -> sp.csr_matrix:
    """Standard second-order five-point Helmholtz operator
    lap(u) + w^2*kappa^2*u - i*w*gamma*kappa^2*u."""
    n = grid.n_nodes
    acc = _CooBuilder(n)
    zero = np.zeros(grid.shape)
    _laplacian_legs(acc, grid, omega, medium.kappa, zero, zero, bc)
    K = np.arange(n)
    diag = omega**2 * medium.kappa_sq - 1j * omega * medium.gamma * medium.kappa_sq
    acc.add(K, K, diag.reshape(-1))
    return acc.tocsr()


def assemble_adr(
    medium: Medium,
    grid: GridSpec,
    omega: float,
    tt: TravelTime,
    scheme: str,
    bc: BCSpec,
) -> sp.csr_matrix:
    """Amplitude operator for the given travel time and advection scheme."""
    if scheme not in ADR_SCHEMES:
        raise ValueError(f"scheme {scheme!r} not in {ADR_SCHEMES}")
    if tt.grid.shape != grid.shape:
        raise ValueError("travel time grid does not match")
    n = grid.n_nodes
    acc = _CooBuilder(n)
    _laplacian_legs(acc, grid, omega, medium.kappa, tt.grad1, tt.grad2, bc)

    if tt.base is not None:
        src = tt.base.source
        I1, I2 = np.indices(grid.shape)
        near_source = (np.abs(I1 - src.i1) <= 1) & (np.abs(I2 - src.i2) <= 1)
    else:
        near_source = np.zeros(grid.shape, dtype=bool)
    _advection_legs(acc, grid, omega, tt.grad1, 0, scheme, near_source)
    _advection_legs(acc, grid, omega, tt.grad2, 1, scheme, near_source)
    _mass_average_legs(acc, grid, omega, tt.lap)

    K = np.arange(n)
    reaction = -(omega**2) * (tt.grad_sq - medium.kappa_sq)
    atten = -1j * omega * medium.gamma * medium.kappa_sq
    acc.add(K, K, (reaction + atten).reshape(-1))
    return acc.tocsr()


def shift_operator(A: sp.spmatrix, alpha: float, omega: float, medium: Medium) -> sp.csr_matrix:
    """Complex-shifted operator A - i*w^2*alpha*diag(kappa^2)."""
    if A.shape[0] != medium.grid.n_nodes:
        raise ValueError("operator dimension does not match the medium grid")
    shift = -1j * omega**2 * alpha * medium.kappa_sq.reshape(-1)
    out = (A + sp.diags(shift)).tocsr()
    out.sort_indices()
    return out


def phase_scaling(tt: TravelTime, omega: float) -> np.ndarray:
    """Diagonal of M: M_jj = exp(-i*w*tau(x_j)); unimodular by construction."""
    return np.exp(-1j * omega * tt.tau.reshape(-1))


def similarity_conjugate(A: sp.spmatrix, m: np.ndarray, direction: str) -> sp.csr_matrix:
    """Diagonal similarity M A M^-1 (entry ij scaled by m_i/m_j) or its
    inverse direction; the sparsity pattern is unchanged."""
    m = np.asarray(m).reshape(-1)
    if A.shape[0] != m.size or A.shape[0] != A.shape[1]:
        raise ValueError("dimension mismatch")
    if direction == "M_A_Minv":
        left, right = m, 1.0 / m
    elif direction == "Minv_A_M":
        left, right = 1.0 / m, m
    else:
        raise ValueError(f"direction {direction!r} not in ('M_A_Minv', 'Minv_A_M')")
    out = (sp.diags(left) @ A @ sp.diags(right)).tocsr()
    out.sort_indices()
    return out


def rhs_transform(q: np.ndarray, tt: TravelTime, omega: float, direction: str) -> np.ndarray:
    """Phase transforms between Helmholtz and amplitude right-hand sides:
    to_adr multiplies by exp(+i*w*tau), to_helmholtz by exp(-i*w*tau)."""
    if q.shape != tt.tau.shape:
        raise ValueError("field/travel-time grid mismatch")
    if direction == "to_adr":
        return q * np.exp(1j * omega * tt.tau)
    if direction == "to_helmholtz":
        return q * np.exp(-1j * omega * tt.tau)
    raise ValueError(f"direction {direction!r} not in ('to_adr', 'to_helmholtz')")


def export_operator_coo(A: sp.spmatrix, path: str) -> None:
    """Debug dump: one 'row col re im' line per stored entry."""
    coo = A.tocoo()
    with open(path, "w", encoding="ascii") as fh:
        for r, c, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{r} {c} {v.real!r} {v.imag!r}\n")


def max_nnz_per_row(A: sp.spmatrix) -> int:
    csr = A.tocsr()
    return int(np.diff(csr.indptr).max())
