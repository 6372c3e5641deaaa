"""Discrete Helmholtz/Poisson operators and their solvers.

Operators are assembled as sparse matrices via Kronecker sums of 1D
second-difference matrices with the boundary fold baked in (a Dirichlet
ghost contributes -1 to the wall diagonal entry, a Neumann ghost +1).
Inhomogeneous Dirichlet data enters through the right-hand side, computed
by applying the ghosted Laplacian to a zero field.

The default solve path is a cached sparse LU factorization; a diagonally
preconditioned conjugate-gradient path is kept for the solver contract
tests.  Fully periodic grids additionally get an FFT fast path.
"""

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SolverError
from .grid import BCType

#: ghost-fold coefficient: ghost = fold * first_interior (+ data term)
_FOLDS = {
    BCType.DIRICHLET: -1.0,
    BCType.NEUMANN_OUTFLOW: 1.0,
}


def _fold_for(bc_type, comp, axis):
    if bc_type is BCType.FREE_SLIP:
        return -1.0 if comp == axis else 1.0
    return _FOLDS[bc_type]


def _second_difference_1d(n, h, grid, axis, comp):
    """1D second-difference matrix with the BC fold, scaled by 1/h^2."""
    main = np.full(n, -2.0)
    off = np.ones(n - 1)
    T = sp.diags([off, main, off], [-1, 0, 1], format="lil")
    if grid.periodic(axis):
        T[0, n - 1] += 1.0
        T[n - 1, 0] += 1.0
    else:
        T[0, 0] += _fold_for(grid.face_bc(axis, 0).type, comp, axis)
        T[n - 1, n - 1] += _fold_for(grid.face_bc(axis, 1).type, comp, axis)
    return (T / h**2).tocsr()


def assemble_laplacian(grid, comp=None):
    """Sparse d-dimensional Laplacian with BC folds for one variable.

    comp=None assembles the scalar (pressure) operator: all non-periodic
    faces are homogeneous Neumann.  comp=0..d-1 uses the velocity BCs of
    that component.
    """
    nd = grid.ndim
    mats = []
    for axis in range(nd):
        n, h = grid.dims[axis], grid.h[axis]
        if comp is None:
            main = np.full(n, -2.0)
            off = np.ones(n - 1)
            T = sp.diags([off, main, off], [-1, 0, 1], format="lil")
            if grid.periodic(axis):
                T[0, n - 1] += 1.0
                T[n - 1, 0] += 1.0
            else:
                T[0, 0] += 1.0
                T[n - 1, n - 1] += 1.0
            T = (T / h**2).tocsr()
        else:
            T = _second_difference_1d(n, h, grid, axis, comp)
        mats.append(T)
    total = sp.csr_matrix((np.prod(grid.dims), np.prod(grid.dims)))
    eyes = [sp.identity(n, format="csr") for n in grid.dims]
    for axis in range(nd):
        term = None
        for a in range(nd):
            m = mats[axis] if a == axis else eyes[a]
            term = m if term is None else sp.kron(term, m, format="csr")
        total = total + term
    return total


class LinearOp:
    """A solvable operator descriptor: matrix, optional constant nullspace."""

    def __init__(self, matrix, singular=False):
        self.matrix = matrix.tocsr()
        self.singular = singular
        self._lu = None
        if singular:
            # Pin the first unknown; compatible right-hand sides keep the
            # discarded equation satisfied.
            pinned = self.matrix.tolil()
            pinned[0, :] = 0.0
            pinned[0, 0] = 1.0
            self._solve_matrix = pinned.tocsc()
        else:
            self._solve_matrix = self.matrix.tocsc()

    @property
    def lu(self):
        if self._lu is None:
            self._lu = spla.splu(self._solve_matrix)
        return self._lu

    def residual(self, x, rhs):
        return self.matrix @ x - rhs


def linear_solve(op, rhs, rtol=1e-9, max_iter=None, method="direct"):
    """Solve op x = rhs to relative residual <= rtol.

    For singular (all-Neumann/periodic) operators the mean of the source is
    removed and the solution mean pinned to zero.
    """
    rhs = np.asarray(rhs, dtype=float).copy()
    if op.singular:
        rhs -= rhs.mean()
    scale = np.linalg.norm(rhs)
    if scale == 0.0:
        return np.zeros_like(rhs)
    if method == "direct":
        if op.singular:
            b = rhs.copy()
            b[0] = 0.0
            x = op.lu.solve(b)
        else:
            x = op.lu.solve(rhs)
    elif method == "cg":
        n = op.matrix.shape[0]
        diag = op.matrix.diagonal()
        M = spla.LinearOperator((n, n), matvec=lambda v: v / diag)
        if op.singular:
            A = spla.LinearOperator(
                (n, n), matvec=lambda v: op.matrix @ (v - v.mean())
            )
        else:
            A = op.matrix
        maxiter = max_iter or 10 * n
        x, info = spla.cg(A, rhs, rtol=rtol * 1e-2, maxiter=maxiter, M=M)
        if info != 0:
            raise SolverError(f"cg failed to converge (info={info})")
    else:
        raise SolverError(f"unknown solve method {method!r}")
    if op.singular:
        x = x - x.mean()
    res = np.linalg.norm(op.residual(x, rhs))
    if res > rtol * scale * 10.0:
        raise SolverError(
            f"linear solve residual {res:.3e} above tolerance "
            f"{rtol * scale:.3e}"
        )
    return x


class SpectralSolver:
    """FFT constant-coefficient solver for fully periodic grids."""

    def __init__(self, grid):
        assert all(grid.periodic(a) for a in range(grid.ndim))
        self.grid = grid
        sym = np.zeros(grid.dims)
        for axis in range(grid.ndim):
            n, h = grid.dims[axis], grid.h[axis]
            k = np.arange(n)
            s1 = (2.0 * np.cos(2.0 * np.pi * k / n) - 2.0) / h**2
            shape = [1] * grid.ndim
            shape[axis] = n
            sym = sym + s1.reshape(shape)
        self.lap_symbol = sym

    def solve_helmholtz(self, rhs, alpha, beta):
        """Solve (alpha - beta lap) x = rhs."""
        denom = alpha - beta * self.lap_symbol
        return np.real(np.fft.ifftn(np.fft.fftn(rhs) / denom))

    def solve_poisson_neg(self, rhs):
        """Solve -lap x = rhs with zero-mean source and solution."""
        rhat = np.fft.fftn(rhs - rhs.mean())
        denom = -self.lap_symbol
        denom_flat = denom.reshape(-1).copy()
        denom_flat[0] = 1.0
        x = np.real(np.fft.ifftn(rhat / denom_flat.reshape(denom.shape)))
        return x - x.mean()
