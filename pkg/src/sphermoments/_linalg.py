"""Dense symmetric eigensolver for small matrices (cyclic Jacobi)."""

import math

import numpy as np

from .errors import ConvergenceError


def jacobi_eigh(M, tol=1e-14, max_sweeps=60):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, V)`` with ``V[:, i]`` the eigenvector for ``w[i]``;
    no ordering or sign convention is applied here.  Cost is O(n^3) per
    sweep, which is negligible for the n <= 10 matrices this package
    works with.
    """
    A = np.array(M, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    if n == 1:
        return np.array([A[0, 0]]), V
    norm = np.linalg.norm(A)
    if norm == 0.0:
        return np.zeros(n), V
    for _ in range(max_sweeps):
        off = math.sqrt(2.0 * sum(A[p, q] ** 2 for p in range(n) for q in range(p + 1, n)))
        if off <= tol * norm:
            return np.diag(A).copy(), V
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rp = A[p, :].copy()
                rq = A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                cp = A[:, p].copy()
                cq = A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    raise ConvergenceError("Jacobi eigensolver did not converge")
