"""Complex sparse mat-vecs, Jacobi preconditioning, restarted flexible GMRES,
and the short Jacobi-preconditioned GMRES runs used as multigrid relaxation."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

_REORTH_THRESHOLD = 1.0 / np.sqrt(2.0)
_BREAKDOWN_EPS = 1e-14


@dataclass
class KrylovConfig:
    """Outer-solver parameters: restart length, total preconditioned
    iterations, relative residual tolerance."""

    restart: int = 5
    maxiter: int = 200
    tol: float = 1e-5
    flexible: bool = True
    collect_diagnostics: bool = False

    def __post_init__(self):
        if self.restart < 1:
            raise ValueError("restart must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass
class SolveReport:
    """Outcome of one Krylov solve.

    ``history[i]`` is the residual norm after i preconditioned iterations
    (history[0] is the initial residual); ``final_relres`` is recomputed from
    the returned iterate with a fresh mat-vec.
    """

    iterations: int
    history: np.ndarray
    converged: bool
    wall_time: float
    bnorm: float
    final_relres: float
    note: str = ""
    ortho_max: float = 0.0
    stage1: "SolveReport | None" = None
    stage2: "SolveReport | None" = None
    fm_time: float = 0.0

    def history_csv_lines(self) -> list[str]:
        scale = self.bnorm if self.bnorm > 0 else 1.0
        return [f"{i},{r / scale:.16e}" for i, r in enumerate(self.history)]


def spmv(A: sp.spmatrix, x: np.ndarray) -> np.ndarray:
    """y = A x with an explicit dimension check."""
    x = np.asarray(x)
    if A.shape[1] != x.shape[0]:
        raise ValueError(f"dimension mismatch: operator {A.shape}, vector {x.shape}")
    return A @ x


def jacobi_apply(A: sp.spmatrix, r: np.ndarray) -> np.ndarray:
    """Diagonal preconditioner application z_j = r_j / A_jj."""
    d = A.diagonal()
    if np.any(d == 0):
        raise ValueError("jacobi_apply: operator has zero diagonal entries")
    return r / d


def _as_operator(A):
    if callable(A):
        return A
    return lambda v: A @ v


def gmres_relax(A: sp.spmatrix, b: np.ndarray, x: np.ndarray, steps: int) -> np.ndarray:
    """Fixed-length Jacobi-preconditioned GMRES run from x; returns the
    residual-minimizing iterate (never increases the residual norm)."""
    d = A.diagonal()
    if np.any(d == 0):
        raise ValueError("gmres_relax: operator has zero diagonal entries")
    return _gmres_relax_pre(A, 1.0 / d, b, x, steps)


def _gmres_relax_pre(A, inv_diag, b, x, steps):
    """gmres_relax with the inverse diagonal precomputed (hot path)."""
    x = np.array(x, dtype=np.complex128, copy=True)
    r = b - A @ x
    beta = np.linalg.norm(r)
    if beta == 0.0 or steps < 1:
        return x
    n = x.shape[0]
    steps = min(steps, n)
    V = np.empty((steps + 1, n), dtype=np.complex128)
    H = np.zeros((steps + 1, steps), dtype=np.complex128)
    V[0] = r / beta
    k = 0
    for j in range(steps):
        w = A @ (inv_diag * V[j])
        for i in range(j + 1):
            hij = np.vdot(V[i], w)
            H[i, j] = hij
            w -= hij * V[i]
        hn = np.linalg.norm(w)
        H[j + 1, j] = hn
        k = j + 1
        if hn <= _BREAKDOWN_EPS * beta:
            break
        V[j + 1] = w / hn
    g = np.zeros(k + 1, dtype=np.complex128)
    g[0] = beta
    y, *_ = np.linalg.lstsq(H[: k + 1, :k], g, rcond=None)
    return x + inv_diag * (V[:k].T @ y)


def fgmres(A, b, x0=None, precond=None, cfg: KrylovConfig | None = None):
    """Restarted (flexible) GMRES.

    ``A`` is a sparse matrix or a callable v -> A v; ``precond`` may vary
    between applications (the flexible variant stores the preconditioned
    basis).  Converges when ||b - A x|| <= tol*||b||; the report carries the
    per-iteration residual history.
    """
    cfg = cfg or KrylovConfig()
    t_start = time.perf_counter()
    apply_A = _as_operator(A)
    b = np.asarray(b, dtype=np.complex128).reshape(-1)
    n = b.shape[0]
    x = (
        np.zeros(n, dtype=np.complex128)
        if x0 is None
        else np.array(x0, dtype=np.complex128, copy=True).reshape(-1)
    )
    apply_M = precond if precond is not None else (lambda v: v)

    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        report = SolveReport(0, np.array([0.0]), True, time.perf_counter() - t_start, 0.0, 0.0)
        return np.zeros(n, dtype=np.complex128), report

    r = b - apply_A(x)
    rnorm = float(np.linalg.norm(r))
    history = [rnorm]
    target = cfg.tol * bnorm
    it = 0
    note = ""
    ortho_max = 0.0

    while it < cfg.maxiter and rnorm > target:
        m = min(cfg.restart, cfg.maxiter - it)
        V = np.empty((m + 1, n), dtype=np.complex128)
        Z = np.empty((m, n), dtype=np.complex128) if cfg.flexible else None
        H = np.zeros((m + 1, m), dtype=np.complex128)
        cs = np.zeros(m, dtype=np.complex128)
        sn = np.zeros(m, dtype=np.complex128)
        g = np.zeros(m + 1, dtype=np.complex128)
        g[0] = rnorm
        V[0] = r / rnorm
        k = 0
        breakdown = False
        for j in range(m):
            z = apply_M(V[j])
            if cfg.flexible:
                Z[j] = z
            w = apply_A(z)
            wnorm_before = np.linalg.norm(w)
            for i in range(j + 1):
                hij = np.vdot(V[i], w)
                H[i, j] = hij
                w -= hij * V[i]
            # one conditional re-orthogonalization pass
            wnorm = np.linalg.norm(w)
            if wnorm < _REORTH_THRESHOLD * wnorm_before:
                for i in range(j + 1):
                    corr = np.vdot(V[i], w)
                    H[i, j] += corr
                    w -= corr * V[i]
                wnorm = np.linalg.norm(w)
            H[j + 1, j] = wnorm
            if not np.isfinite(wnorm):
                note = "numerical breakdown: non-finite Arnoldi vector"
                breakdown = True
                k = j
                break
            lucky = wnorm <= _BREAKDOWN_EPS * max(bnorm, 1e-300)
            if not lucky:
                V[j + 1] = w / wnorm
            # Givens rotations keep a running residual estimate
            for i in range(j):
                t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                H[i + 1, j] = -np.conj(sn[i]) * H[i, j] + np.conj(cs[i]) * H[i + 1, j]
                H[i, j] = t
            denom = np.sqrt(np.abs(H[j, j]) ** 2 + np.abs(H[j + 1, j]) ** 2)
            if denom == 0.0:
                cs[j], sn[j] = 1.0, 0.0
            else:
                cs[j] = np.conj(H[j, j]) / denom
                sn[j] = np.conj(H[j + 1, j]) / denom
            H[j, j] = cs[j] * H[j, j] + sn[j] * H[j + 1, j]
            H[j + 1, j] = 0.0
            g[j + 1] = -np.conj(sn[j]) * g[j]
            g[j] = cs[j] * g[j]
            it += 1
            k = j + 1
            history.append(float(np.abs(g[j + 1])))
            if lucky or history[-1] <= target:
                break
        if cfg.collect_diagnostics and k > 0:
            G = V[:k] @ V[:k].conj().T
            np.fill_diagonal(G, 0.0)
            ortho_max = max(ortho_max, float(np.abs(G).max()))
        if k > 0:
            y = np.linalg.solve(H[:k, :k], g[:k]) if k > 1 else g[:1] / H[0, 0]
            if cfg.flexible:
                x = x + Z[:k].T @ y
            else:
                x = x + apply_M(V[:k].T @ y)
        r = b - apply_A(x)
        rnorm = float(np.linalg.norm(r))
        if breakdown:
            break

    elapsed = time.perf_counter() - t_start
    final_relres = rnorm / bnorm
    converged = rnorm <= target * (1.0 + 1e-12) and not note
    report = SolveReport(
        iterations=it,
        history=np.asarray(history),
        converged=bool(converged),
        wall_time=elapsed,
        bnorm=bnorm,
        final_relres=final_relres,
        note=note,
        ortho_max=ortho_max,
    )
    return x, report
