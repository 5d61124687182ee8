"""Dense symmetric linear algebra for curvature operators.

Eigenvalues come from a cyclic Jacobi solver; a declared kernel vector is
removed by projecting onto its orthogonal complement before the solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AlphaFlowError, EvaluationFailure, KernelMismatch, NotPSD
from .packing2d import as_radii, curvature_jacobian_u, s_alpha_2d


def jacobi_eigh(A, tol: float = 1e-14, max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ascending eigenvalues and the matching orthonormal eigenvectors
    (as columns).
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    A = 0.5 * (A + A.T)
    V = np.eye(n)
    if n == 1:
        return A.diagonal().copy(), V
    scale = max(np.abs(A).max(), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.triu(A, 1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + math.hypot(theta, 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = A[:, p].copy()
                aq = A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                rp = A[p, :].copy()
                rq = A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                V[:, p] = c * vp - s * V[:, q]
                V[:, q] = s * vp + c * V[:, q]
    w = A.diagonal().copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


@dataclass(frozen=True)
class SymOperator:
    """Symmetric matrix with an optional known kernel direction."""

    matrix: np.ndarray
    kernel: np.ndarray | None = None
    symmetry_tol: float = 1e-9
    kernel_tol: float = 1e-8

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", M)
        if self.kernel is not None:
            object.__setattr__(self, "kernel", np.asarray(self.kernel, dtype=float))

    @property
    def norm_inf(self) -> float:
        return float(np.linalg.norm(self.matrix, np.inf))

    def validate(self) -> None:
        M = self.matrix
        nrm = max(self.norm_inf, 1.0)
        if np.abs(M - M.T).max() > self.symmetry_tol * nrm:
            raise NotPSD("operator is not symmetric")
        if self.kernel is not None:
            k = self.kernel
            if k.shape != (M.shape[0],) or not np.any(k):
                raise KernelMismatch("kernel vector has the wrong shape or is zero")
            k = k / np.linalg.norm(k)
            if np.abs(M @ k).max() > self.kernel_tol * self.norm_inf:
                raise KernelMismatch("declared kernel vector is not annihilated by the operator")


def complement_basis(k: np.ndarray) -> np.ndarray:
    """Orthonormal basis (columns) of the orthogonal complement of ``k``."""
    k = np.asarray(k, dtype=float)
    n = k.shape[0]
    Q, _ = np.linalg.qr(np.column_stack([k, np.eye(n)]))
    return Q[:, 1:n]


def restricted_eigenvalues(op: SymOperator) -> np.ndarray:
    op.validate()
    M = 0.5 * (op.matrix + op.matrix.T)
    if op.kernel is None:
        return jacobi_eigh(M)[0]
    Q = complement_basis(op.kernel)
    return jacobi_eigh(Q.T @ M @ Q)[0]


def first_positive_eigenvalue(op: SymOperator, psd_tol: float = 1e-7) -> float:
    """Smallest eigenvalue of ``op`` on the complement of its declared kernel."""
    w = restricted_eigenvalues(op)
    if w[0] < -psd_tol * max(1.0, op.norm_inf):
        raise NotPSD(f"eigenvalue {w[0]:.3e} is negative")
    if op.kernel is not None and w[0] <= 1e-12 * op.norm_inf:
        raise KernelMismatch("operator has a kernel larger than the declared direction")
    return float(w[0])


def alpha_laplacian_2d(L, r, alpha: float) -> np.ndarray:
    """Matrix of ``-Sigma^{-alpha} L`` with ``Sigma = diag(r)``."""
    r = as_radii(r)
    return -(r ** (-alpha))[:, None] * np.asarray(L, dtype=float)


def alpha_laplacian_3d(Lam, r, alpha: float) -> np.ndarray:
    """Matrix of ``-Sigma^{-alpha} Lambda Sigma``."""
    r = as_radii(r)
    return -(r ** (-alpha))[:, None] * np.asarray(Lam, dtype=float) * r[None, :]


def inner_product_alpha(f, h, r, alpha: float) -> float:
    r = as_radii(r)
    return float(np.sum(np.asarray(f) * np.asarray(h) * r**alpha))


def symmetric_conjugate_2d(L, r, alpha: float) -> SymOperator:
    """``Sigma^{-alpha/2} L Sigma^{-alpha/2}``, similar to ``-Delta_alpha``; kernel ``r^{alpha/2}``."""
    r = as_radii(r)
    d = r ** (-alpha / 2.0)
    M = d[:, None] * np.asarray(L, dtype=float) * d[None, :]
    return SymOperator(0.5 * (M + M.T), kernel=r ** (alpha / 2.0))


def symmetric_conjugate_3d(Lam, r, alpha: float, kernel_tol: float = 1e-6) -> SymOperator:
    """``Sigma^{(1-alpha)/2} Lambda Sigma^{(1-alpha)/2}``, similar to ``-Delta_alpha``.

    Its kernel is spanned by ``r^{(1+alpha)/2}``.  ``Lambda`` comes from finite
    differences, hence the looser default kernel tolerance.
    """
    r = as_radii(r)
    d = r ** ((1.0 - alpha) / 2.0)
    M = d[:, None] * np.asarray(Lam, dtype=float) * d[None, :]
    return SymOperator(0.5 * (M + M.T), kernel=r ** ((1.0 + alpha) / 2.0), kernel_tol=kernel_tol)


def lambda1_2d(L, r, alpha: float) -> float:
    return first_positive_eigenvalue(symmetric_conjugate_2d(L, r, alpha))


def lambda1_3d(Lam, r, alpha: float, kernel_tol: float = 1e-6) -> float:
    return first_positive_eigenvalue(symmetric_conjugate_3d(Lam, r, alpha, kernel_tol), psd_tol=1e-6)


def hessian_potential_2d(surface, r, alpha: float, L=None) -> np.ndarray:
    """Hessian in ``u`` of the potential whose gradient is ``K - s_alpha r^alpha``.

    ``L - alpha s_alpha (Sigma^alpha - r^alpha (r^alpha)^T / ||r||_alpha^alpha)``
    """
    r = as_radii(r)
    if L is None:
        L = curvature_jacobian_u(surface, r)
    s = s_alpha_2d(surface, r, alpha)
    ra = r**alpha
    return L - alpha * s * (np.diag(ra) - np.outer(ra, ra) / ra.sum())


def fd_jacobian(fn, x, step=None) -> np.ndarray:
    """Central-difference Jacobian ``(fn(x + h e_j) - fn(x - h e_j)) / 2h``, column by column.

    ``step`` may be a scalar or per-coordinate array; default
    ``1e-6 * max(1, |x_j|)``.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if step is None:
        h = 1e-6 * np.maximum(1.0, np.abs(x))
    else:
        h = np.broadcast_to(np.asarray(step, dtype=float), (n,))
    cols = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = h[j]
        try:
            fp = np.asarray(fn(x + e), dtype=float)
            fm = np.asarray(fn(x - e), dtype=float)
        except AlphaFlowError:
            raise
        except Exception as exc:
            raise EvaluationFailure(f"function failed near coordinate {j}: {exc}") from exc
        cols.append((fp - fm) / (2.0 * h[j]))
    return np.column_stack(cols)
