"""
Matrix-valued differential forms on a coordinate box.

Fields are closures: evaluating a 1-form at a point returns an array of
shape (d, n, n), a 2-form (d, d, n, n), a 3-form (d, d, d, n, n), with d the
number of coordinates and n the fiber dimension.  Coordinate derivatives are
central differences with step h, so every derived field keeps a margin of one
stencil width from the box boundary.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Callable

import numpy as np
from scipy.linalg import expm

UNITARY_TOL = 1e-12


class PatchError(ValueError):
    """Evaluation point too close to the patch boundary for the stencil."""


@dataclass(frozen=True)
class Patch:
    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def box(cls, lo, hi) -> Patch:
        return cls(np.asarray(lo, dtype=float), np.asarray(hi, dtype=float))

    @property
    def dim(self) -> int:
        return len(self.lo)

    def check(self, p: np.ndarray, margin: float) -> None:
        if np.any(p < self.lo + margin) or np.any(p > self.hi - margin):
            raise PatchError(f"point {p} within {margin:g} of the patch boundary")

    def sample(self, rng: np.random.Generator, count: int, margin: float) -> np.ndarray:
        span = self.hi - self.lo - 2 * margin
        if np.any(span <= 0):
            raise PatchError("patch too small for the stencil margin")
        return self.lo + margin + rng.random((count, self.dim)) * span


@dataclass(frozen=True)
class MatrixFormField:
    degree: int
    n: int
    patch: Patch
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    margin: float = 0.0

    @property
    def dim(self) -> int:
        return self.patch.dim

    def __call__(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        self.patch.check(p, self.margin)
        return self.func(p)


@dataclass(frozen=True)
class GaugeField:
    n: int
    patch: Patch
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    margin: float = 0.0

    def __call__(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        self.patch.check(p, self.margin)
        u = self.func(p)
        err = np.abs(u.conj().T @ u - np.eye(self.n)).max()
        if err > UNITARY_TOL:
            raise ValueError(f"gauge field not unitary at {p} (deviation {err:.1e})")
        return u


def _partial(f, p: np.ndarray, mu: int, h: float) -> np.ndarray:
    e = np.zeros_like(p)
    e[mu] = h
    return (f(p + e) - f(p - e)) / (2 * h)


def _comm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def _d1(w: MatrixFormField, p: np.ndarray, h: float) -> np.ndarray:
    d = w.dim
    grad = np.stack([_partial(w, p, mu, h) for mu in range(d)])  # [mu, nu] = d_mu w_nu
    return grad - grad.transpose(1, 0, 2, 3)


def exterior_derivative(w: MatrixFormField, h: float) -> MatrixFormField:
    """(dw)_{mu nu} = d_mu w_nu - d_nu w_mu for a 1-form; cyclic sum for a 2-form."""
    if w.degree == 1:
        func = lambda p: _d1(w, p, h)  # noqa: E731
    elif w.degree == 2:
        def func(p):
            grad = np.stack([_partial(w, p, mu, h) for mu in range(w.dim)])  # [l, m, n]
            return grad + grad.transpose(1, 2, 0, 3, 4) + grad.transpose(2, 0, 1, 3, 4)
    else:
        raise ValueError("exterior derivative implemented for 1- and 2-forms")
    return MatrixFormField(w.degree + 1, w.n, w.patch, func, w.margin + h)


def wedge(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Component wedge of sampled matrix forms (1^1 -> 2, 2^1 -> 3, 1^2 -> 3)."""
    if a.ndim == 3 and b.ndim == 3:
        ab = np.einsum("mij,njk->mnik", a, b)
        return ab - ab.transpose(1, 0, 2, 3)
    if a.ndim == 4 and b.ndim == 3:
        t = np.einsum("lmij,njk->lmnik", a, b)
    elif a.ndim == 3 and b.ndim == 4:
        # (w ^ W)_{lmn} = w_l W_mn + cyclic
        t = np.einsum("lij,mnjk->lmnik", a, b)
    else:
        raise ValueError("unsupported form degrees")
    return t + t.transpose(1, 2, 0, 3, 4) + t.transpose(2, 0, 1, 3, 4)


def curvature(w: MatrixFormField, h: float) -> MatrixFormField:
    """Omega = dw + w ^ w, i.e. d_mu w_nu - d_nu w_mu + [w_mu, w_nu]."""
    if w.degree != 1:
        raise ValueError("curvature needs a connection 1-form")
    dw = exterior_derivative(w, h)

    def func(p):
        return dw(p) + wedge(w(p), w(p))

    return MatrixFormField(2, w.n, w.patch, func, dw.margin)


def gauge_transform(w: MatrixFormField, u: GaugeField, h: float) -> MatrixFormField:
    """w -> U^-1 w U + U^-1 dU."""
    if w.degree != 1:
        raise ValueError("gauge transform acts on connection 1-forms")

    def func(p):
        up = u(p)
        ui = up.conj().T
        du = np.stack([_partial(u, p, mu, h) for mu in range(w.dim)])
        return ui @ w(p) @ up + ui @ du

    return MatrixFormField(1, w.n, w.patch, func, max(w.margin, u.margin + h))


def pure_gauge(u: GaugeField, h: float) -> MatrixFormField:
    """U dU^-1, the connection of the constant-section basis."""
    def func(p):
        up = u(p)
        dui = np.stack([_partial(lambda q: u(q).conj().T, p, mu, h) for mu in range(u.patch.dim)])
        return up @ dui

    return MatrixFormField(1, u.n, u.patch, func, u.margin + h)


def conjugate(omega: np.ndarray, up: np.ndarray) -> np.ndarray:
    """U^-1 Omega U on every component."""
    return up.conj().T @ omega @ up


def bianchi_residual(w: MatrixFormField, h: float) -> MatrixFormField:
    """dOmega - (Omega ^ w - w ^ Omega); vanishes as O(h^2)."""
    om = curvature(w, h)
    dom = exterior_derivative(om, h)

    def func(p):
        o, a = om(p), w(p)
        return dom(p) - (wedge(o, a) - wedge(a, o))

    return MatrixFormField(3, w.n, w.patch, func, dom.margin)


def max_norm(values: np.ndarray) -> float:
    """Largest Frobenius norm over the form components."""
    return float(np.sqrt((np.abs(values) ** 2).sum(axis=(-2, -1))).max())


def antisymmetry_defect(values: np.ndarray) -> float:
    """How far a 2- or 3-form sample is from total antisymmetry in its indices."""
    k = values.ndim - 2
    worst = 0.0
    for perm in permutations(range(k)):
        sign = _perm_sign(perm)
        swapped = values.transpose(*perm, k, k + 1)
        worst = max(worst, float(np.abs(swapped - sign * values).max()))
    return worst


def _perm_sign(perm) -> int:
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def anti_hermitian_defect(values: np.ndarray) -> float:
    return float(np.abs(values + np.conj(np.swapaxes(values, -1, -2))).max())


# -- smooth random fields -------------------------------------------------------


def _random_anti_hermitian(rng: np.random.Generator, n: int, scale: float) -> np.ndarray:
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (a - a.conj().T) / (2 * np.sqrt(n))


@dataclass(frozen=True)
class TrigSeries:
    """sum_j A_j sin(k_j . p + phi_j) with fixed matrix coefficients A_j."""

    coeffs: np.ndarray  # (terms, ..., n, n)
    waves: np.ndarray  # (terms, d)
    phases: np.ndarray  # (terms,)

    def value(self, p: np.ndarray) -> np.ndarray:
        s = np.sin(self.waves @ p + self.phases)
        return np.tensordot(s, self.coeffs, axes=1)

    def gradient(self, p: np.ndarray) -> np.ndarray:
        """Analytic d/dp_mu, stacked on a leading axis."""
        c = np.cos(self.waves @ p + self.phases)
        return np.tensordot(self.waves.T * c, self.coeffs, axes=1)


def random_connection(
    rng: np.random.Generator, n: int, patch: Patch, terms: int = 3, scale: float = 1.0
) -> tuple[MatrixFormField, TrigSeries]:
    """Anti-hermitian trigonometric-polynomial 1-form and its generating series."""
    d = patch.dim
    coeffs = np.stack(
        [np.stack([_random_anti_hermitian(rng, n, scale) for _ in range(d)]) for _ in range(terms)]
    )
    series = TrigSeries(coeffs, rng.uniform(-1.5, 1.5, size=(terms, d)), rng.uniform(0, 2 * np.pi, terms))
    return MatrixFormField(1, n, patch, series.value), series


def random_gauge(
    rng: np.random.Generator, n: int, patch: Patch, terms: int = 3, scale: float = 1.0
) -> tuple[GaugeField, TrigSeries]:
    """U(p) = expm(anti-hermitian trigonometric polynomial)."""
    d = patch.dim
    coeffs = np.stack([_random_anti_hermitian(rng, n, scale) for _ in range(terms)])
    series = TrigSeries(coeffs, rng.uniform(-1.5, 1.5, size=(terms, d)), rng.uniform(0, 2 * np.pi, terms))
    return GaugeField(n, patch, lambda p: expm(series.value(p))), series


def constant_connection(values: np.ndarray, patch: Patch) -> MatrixFormField:
    values = np.asarray(values, dtype=complex)
    return MatrixFormField(1, values.shape[-1], patch, lambda p: values)
