"""Dense complex linear algebra on small multipartite spaces.

All tensor indices are big-endian over party order: party 1 is the most
significant digit of a global basis index.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

HERMITIAN_TOL = 1e-9
RANK_RTOL = 1e-8


class DimensionError(ValueError):
    """Raised when array shapes do not match the declared dimensions."""


class NotHermitianError(ValueError):
    pass


def kron(a, b):
    """Kronecker product, ``(a ⊗ b)[i*rb + k, j*cb + l] = a[i, j] * b[k, l]``."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def kron_all(factors):
    """Kronecker product of a sequence, left to right."""
    factors = list(factors)
    if not factors:
        return np.ones(1, dtype=complex)
    return reduce(kron, factors)


def is_hermitian(m, tol=HERMITIAN_TOL):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def partial_transpose(rho, dims, side="first"):
    """Transpose the ``side`` factor of an operator on ``C^dA ⊗ C^dB``.

    Parameters
    ----------
    rho : array_like
        Square matrix of size ``dA * dB``.
    dims : tuple of int
        ``(dA, dB)``.
    side : {"first", "second"}
        Which tensor factor gets transposed.
    """
    rho = np.asarray(rho, dtype=complex)
    d_a, d_b = dims
    n = d_a * d_b
    if rho.shape != (n, n):
        raise DimensionError(f"expected a {n}x{n} matrix for dims {tuple(dims)}, got {rho.shape}")
    t = rho.reshape(d_a, d_b, d_a, d_b)
    if side == "first":
        t = t.transpose(2, 1, 0, 3)
    elif side == "second":
        t = t.transpose(0, 3, 2, 1)
    else:
        raise ValueError(f"side must be 'first' or 'second', not {side!r}")
    return t.reshape(n, n)


def hermitian_eigen(m, tol=HERMITIAN_TOL):
    """Eigen-decomposition of a Hermitian matrix.

    Returns ascending real eigenvalues and the matching eigenvectors as
    columns.  The input is symmetrised before diagonalisation so that
    round-off in the lower triangle cannot leak into the result.
    """
    m = np.asarray(m, dtype=complex)
    if not is_hermitian(m, tol):
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    vals, vecs = np.linalg.eigh(0.5 * (m + m.conj().T))
    return vals, vecs


def min_eigenvalue(m, tol=HERMITIAN_TOL):
    return float(hermitian_eigen(m, tol)[0][0])


def orthonormal_span(vectors, rtol=RANK_RTOL):
    """Orthonormal basis (as columns) of the span of ``vectors``."""
    mat = np.column_stack([np.asarray(v, dtype=complex) for v in vectors])
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return u[:, :0]
    r = int(np.sum(s > rtol * s[0]))
    return u[:, :r]


def null_space(a, rtol=RANK_RTOL):
    """Columns spanning the null space of ``a`` (SVD, relative threshold)."""
    a = np.atleast_2d(a)
    n = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(n, dtype=a.dtype)
    _, s, vh = np.linalg.svd(a)
    if s.size == 0 or s[0] == 0:
        return np.eye(n, dtype=a.dtype)
    r = int(np.sum(s > rtol * s[0]))
    return vh[r:].conj().T


def hermitian_generators(dim):
    """Real basis of the ``dim**2``-dimensional space of Hermitian matrices.

    Order: diagonal units, then for each ``k < l`` the symmetric pair
    ``E_kl + E_lk`` followed by the antisymmetric pair ``i(E_kl - E_lk)``.
    """
    gens = []
    for k in range(dim):
        g = np.zeros((dim, dim), dtype=complex)
        g[k, k] = 1.0
        gens.append(g)
    for k in range(dim):
        for l in range(k + 1, dim):
            s = np.zeros((dim, dim), dtype=complex)
            s[k, l] = s[l, k] = 1.0
            a = np.zeros((dim, dim), dtype=complex)
            a[k, l] = 1j
            a[l, k] = -1j
            gens.extend((s, a))
    return np.array(gens)


@dataclass(frozen=True)
class HermitianSolutionSpace:
    """Real span of Hermitian matrices solving ``<bra|X|ket> = 0`` constraints.

    ``coefficients`` holds an orthonormal basis of the solution space in the
    coordinates of :func:`hermitian_generators`; ``basis`` holds the matching
    matrices.
    """

    dim: int
    basis: tuple
    coefficients: np.ndarray

    @property
    def rank(self):
        return len(self.basis)

    def contains(self, m, tol=1e-9):
        """Whether the Hermitian matrix ``m`` lies in the span."""
        x = hermitian_coordinates(m)
        if self.rank == 0:
            return bool(np.linalg.norm(x) <= tol)
        c = self.coefficients
        resid = x - c @ (c.T @ x)
        return bool(np.linalg.norm(resid) <= tol * max(1.0, np.linalg.norm(x)))


def hermitian_coordinates(m):
    """Coordinates of a Hermitian matrix in the :func:`hermitian_generators` basis."""
    m = np.asarray(m, dtype=complex)
    dim = m.shape[0]
    coords = [m[k, k].real for k in range(dim)]
    for k in range(dim):
        for l in range(k + 1, dim):
            coords.append(m[k, l].real)
            coords.append(m[k, l].imag)
    return np.array(coords)


def constraint_matrix(dim, constraints):
    """Stack each complex condition ``<bra|X|ket> = 0`` as two real rows."""
    if not constraints:
        return np.zeros((0, dim * dim))
    bras = np.array([np.asarray(b, dtype=complex) for b, _ in constraints])
    kets = np.array([np.asarray(k, dtype=complex) for _, k in constraints])
    # outer[c, i, j] = conj(bra_c[i]) * ket_c[j] = <bra_c|E_ij|ket_c>
    outer = bras.conj()[:, :, None] * kets[:, None, :]
    iu, ju = np.triu_indices(dim, k=1)
    upper = outer[:, iu, ju]
    lower = outer[:, ju, iu]
    cols = [np.diagonal(outer, axis1=1, axis2=2)]
    pairs = np.empty((len(constraints), 2 * len(iu)), dtype=complex)
    pairs[:, 0::2] = upper + lower
    pairs[:, 1::2] = 1j * (upper - lower)
    cols.append(pairs)
    vals = np.concatenate(cols, axis=1)
    return np.concatenate([vals.real, vals.imag], axis=0)


def solve_hermitian_constraints(dim, constraints, rtol=RANK_RTOL):
    """All Hermitian ``dim x dim`` matrices ``X`` with ``<bra|X|ket> = 0``.

    Each constraint is a ``(bra, ket)`` pair.  For Hermitian ``X`` the
    conjugate condition ``<ket|X|bra> = 0`` follows automatically, so one
    pair contributes exactly two real equations.
    """
    a = constraint_matrix(dim, constraints)
    ns = null_space(a, rtol)
    gens = hermitian_generators(dim)
    basis = tuple(np.tensordot(ns[:, j], gens, axes=1) for j in range(ns.shape[1]))
    return HermitianSolutionSpace(dim=dim, basis=basis, coefficients=np.real(ns))
