"""Grounded-Laplacian solves shared by the equilibrium and resistor code.

Below ``DIRECT_LIMIT`` unknowns a sparse LU factorization is used; above
it, conjugate gradients with a Jacobi preconditioner and relative residual
``CG_RTOL``. Grounded Laplacians of connected graphs are SPD, so both are
applicable.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NotConverged, SingularSystem

DIRECT_LIMIT = 10_000
CG_RTOL = 1e-10


def laplacian(W: sp.spmatrix) -> sp.csr_matrix:
    W = sp.csr_matrix(W)
    return sp.csr_matrix(sp.diags(np.asarray(W.sum(axis=1)).ravel()) - W)


class SPDSolver:
    """Reusable solver for a symmetric positive definite sparse matrix."""

    def __init__(self, A: sp.spmatrix):
        A = sp.csc_matrix(A)
        self.shape = A.shape
        self.n = A.shape[0]
        if self.n == 0:
            self._lu = None
            return
        diag = A.diagonal()
        if np.any(diag <= 0):
            raise SingularSystem("nonpositive diagonal entry in reduced Laplacian")
        if self.n < DIRECT_LIMIT:
            try:
                self._lu = spla.splu(A)
            except RuntimeError as exc:
                raise SingularSystem(str(exc)) from exc
            if not np.all(np.isfinite(self._lu.U.diagonal())) or np.any(
                np.abs(self._lu.U.diagonal()) < 1e-14 * np.abs(diag).max()
            ):
                raise SingularSystem("reduced Laplacian is numerically singular")
        else:
            self._lu = None
            self._A = sp.csr_matrix(A)
            self._M = sp.diags(1.0 / diag)

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        if self.n == 0:
            return np.zeros_like(b)
        if self._lu is not None:
            return self._lu.solve(b)
        if b.ndim == 2:
            return np.column_stack([self.solve(col) for col in b.T])
        x, info = spla.cg(self._A, b, rtol=CG_RTOL, atol=0.0, M=self._M, maxiter=10 * self.n)
        if info != 0:
            raise NotConverged(f"conjugate gradient stopped with info={info}")
        return x


def grounded_solve(W: sp.spmatrix, rhs: np.ndarray, ground: int) -> np.ndarray:
    """Solve ``L v = rhs`` with ``v[ground] = 0``; ``rhs`` must sum to zero."""
    L = laplacian(W)
    n = L.shape[0]
    keep = np.array([k for k in range(n) if k != ground], dtype=int)
    v = np.zeros(n)
    if len(keep):
        v[keep] = SPDSolver(L[keep][:, keep]).solve(np.asarray(rhs, dtype=float)[keep])
    return v
