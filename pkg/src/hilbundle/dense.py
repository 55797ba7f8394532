"""
Dense-matrix oracle for small grids.

Builds the Fourier matrix from explicit exponentials (no FFT) and assembles
operators and propagators as matrices, so state-level actions can be
checked against an independent construction.  Meant for N <= 64 per axis.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sps
from scipy.linalg import expm
from scipy.sparse.linalg import expm_multiply

from .grid import GridSpace, Rep, StateVector

MAX_DENSE = 64 * 64


class DenseOracle:
    def __init__(self, space: GridSpace):
        if space.n**space.dims > MAX_DENSE:
            raise ValueError("grid too large for dense matrices")
        self.space = space
        n, x = space.n, space.x
        j = np.arange(n)
        k = 2 * np.pi / space.length * np.where(j < n // 2, j, j - n)
        self.k = k
        # position amplitudes -> momentum amplitudes (continuum-normalized)
        self.fourier = space.dx / np.sqrt(2 * np.pi) * np.exp(-1j * np.outer(k, x))
        self.inverse_fourier = space.dk / np.sqrt(2 * np.pi) * np.exp(1j * np.outer(x, k))
        self.x = np.diag(x).astype(complex)
        self.p = self._momentum_diag(k)
        self.eye = np.eye(n, dtype=complex)

    def _momentum_diag(self, values: np.ndarray) -> np.ndarray:
        return self.inverse_fourier @ np.diag(values) @ self.fourier

    # -- 1D building blocks -------------------------------------------------

    def hfree_1d(self) -> np.ndarray:
        return self._momentum_diag(self.k**2 / (2 * self.space.mass))

    def time_1d(self, tau: float) -> np.ndarray:
        return self._momentum_diag(np.exp(-1j * self.k**2 * tau / (2 * self.space.mass)))

    def space_1d(self, zeta: float) -> np.ndarray:
        return self._momentum_diag(np.exp(1j * self.k * zeta))

    def boost_1d(self, eta: float) -> np.ndarray:
        return np.diag(np.exp(-1j * self.space.mass * eta * self.space.x))

    # -- full-space matrices --------------------------------------------------

    def embed(self, mat: np.ndarray, axis: int = 0) -> np.ndarray:
        if self.space.dims == 1:
            return mat
        return np.kron(mat, self.eye) if axis == 0 else np.kron(self.eye, mat)

    def operator(self, name: str) -> np.ndarray:
        m = self.space.mass
        if name in ("X", "X1"):
            return self.embed(self.x, 0)
        if name == "X2":
            return self.embed(self.x, 1)
        if name in ("P", "P1"):
            return self.embed(self.p, 0)
        if name == "P2":
            return self.embed(self.p, 1)
        if name == "K":
            return m * self.embed(self.x, 0)
        if name == "Hfree":
            h = self.hfree_1d()
            return h if self.space.dims == 1 else self.embed(h, 0) + self.embed(h, 1)
        if name == "J":
            return self.operator("X1") @ self.operator("P2") - self.operator("X2") @ self.operator("P1")
        raise ValueError(f"unknown operator {name!r}")

    def hamiltonian(self, potential: np.ndarray, coriolis: float = 0.0) -> np.ndarray:
        h = self.operator("Hfree") + np.diag(np.asarray(potential, dtype=complex).ravel())
        if coriolis:
            sp = self.space
            h = h - coriolis * self.operator("J")
            h = h + np.diag(0.5 * sp.mass * coriolis**2 * sum(xi**2 for xi in sp.xs).ravel())
        return h

    def propagator(self, hamiltonian: np.ndarray, t: float) -> np.ndarray:
        return expm(-1j * t * hamiltonian)

    def angular_momentum_sparse(self):
        """J = X1 P2 - X2 P1 as a sparse Kronecker sum, for 2D grids too big for expm."""
        if self.space.dims != 2:
            raise ValueError("angular momentum needs a 2D grid")
        x = sps.diags(self.space.x.astype(complex))
        p = sps.csr_matrix(self.p)
        return (sps.kron(x, p) - sps.kron(p, x)).tocsr()

    def sparse_hamiltonian(self, potential: np.ndarray, coriolis: float = 0.0):
        """Same operator as ``hamiltonian`` built from sparse Kronecker products."""
        sp = self.space
        h1 = sps.csr_matrix(self.hfree_1d())
        if sp.dims == 1:
            h = h1
        else:
            eye = sps.identity(sp.n, dtype=complex, format="csr")
            h = sps.kron(h1, eye) + sps.kron(eye, h1)
        v = np.asarray(potential, dtype=complex).ravel()
        if coriolis:
            h = h - coriolis * self.angular_momentum_sparse()
            v = v + 0.5 * sp.mass * coriolis**2 * sum(xi**2 for xi in sp.xs).ravel()
        return (h + sps.diags(v)).tocsr()

    def evolve(self, hamiltonian, psi: StateVector, t: float) -> StateVector:
        a = psi.position().amplitudes
        out = expm_multiply(-1j * t * hamiltonian, a.ravel()).reshape(a.shape)
        return StateVector(out, Rep.POSITION, psi.space).as_rep(psi.rep)

    def rotate(self, psi: StateVector, theta: float) -> StateVector:
        """exp(-i J theta) psi through scipy's action of the matrix exponential."""
        return self.evolve(self.angular_momentum_sparse(), psi, theta)

    def act(self, mat: np.ndarray, psi: StateVector) -> StateVector:
        a = psi.position().amplitudes
        out = StateVector((mat @ a.ravel()).reshape(a.shape), Rep.POSITION, psi.space)
        return out.as_rep(psi.rep)

    def act_1d(self, mat: np.ndarray, psi: StateVector, axis: int = 0) -> StateVector:
        """Apply a per-axis matrix without forming the Kronecker product."""
        a = np.moveaxis(psi.position().amplitudes, axis, 0)
        out = np.moveaxis(np.tensordot(mat, a, axes=1), 0, axis)
        return StateVector(out, Rep.POSITION, psi.space).as_rep(psi.rep)
