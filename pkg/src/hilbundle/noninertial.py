"""
Curves of frames and the Hamiltonians seen along them.

An observer riding a curve t -> U(t) of frames sees the generator
H = i (dU/dt) U^-1.  ``numeric_effective_hamiltonian`` differentiates the
transport word directly; ``analytic_effective_hamiltonian`` returns the closed
form with its pseudo-force terms.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .galilei import GroupWord, boosted, rotation, space, time, transport
from .grid import DimensionError, GridSpace, Op, StateVector, apply, gaussian, inner, norm

Action = Callable[[StateVector], StateVector]


@dataclass(frozen=True)
class FrameCurve:
    """Linear acceleration (1D) or uniform circular motion (2D) through frame space."""

    kind: str
    g: float = 0.0
    omega: float = 0.0
    radius: float = 0.0
    order: str = "derivation"

    def __post_init__(self):
        if self.kind not in ("linear", "circular"):
            raise ValueError(f"unknown curve kind {self.kind!r}")
        if self.kind == "circular" and self.radius < 0:
            raise ValueError("rotation radius must be non-negative")
        if self.order not in ("derivation", "printed"):
            raise ValueError("order must be 'derivation' or 'printed'")

    @classmethod
    def linear(cls, g: float, order: str = "derivation") -> FrameCurve:
        return cls("linear", g=g, order=order)

    @classmethod
    def circular(cls, omega: float, radius: float) -> FrameCurve:
        return cls("circular", omega=omega, radius=radius)

    @property
    def dims(self) -> int:
        return 1 if self.kind == "linear" else 2

    def coord(self, t: float) -> dict:
        if self.kind == "linear":
            return {"t": t, "x": 0.5 * self.g * t**2, "v": self.g * t}
        th = self.omega * t
        r = self.radius
        return {
            "t": t,
            "theta": th,
            "r": (r * np.cos(th), r * np.sin(th)),
            "v": (-r * self.omega * np.sin(th), r * self.omega * np.cos(th)),
            "speed": r * self.omega,
        }

    def word(self, t: float) -> GroupWord:
        c = self.coord(t)
        if self.kind == "linear":
            if self.order == "derivation":
                # U_t U_x U_v, the product differentiated to obtain -m g (X + x)
                return GroupWord.of(time(t), space(c["x"]), boosted(-c["v"]))
            # U_v U_x U_t as printed next to that derivation
            return GroupWord.of(boosted(-c["v"]), space(c["x"]), time(t))
        # U_v U_theta U_r U_t with U_theta = exp(+i J theta), boost along y
        return GroupWord.of(boosted(c["speed"], axis=1), rotation(-c["theta"]), space(c["r"]), time(t))


@dataclass(frozen=True)
class EffectiveHamiltonian:
    """sum_i (P_i + a_i(X))^2 / 2m + V(X) + offset.

    The momentum shift a(X) is a constant vector plus the symmetric-gauge
    Coriolis term m w (X2, -X1).
    """

    mass: float
    shift: tuple[float, ...] = (0.0,)
    coriolis: float = 0.0
    potential: Callable[..., np.ndarray] | None = field(default=None, repr=False)
    offset: float = 0.0
    label: str = ""

    def shift_fields(self, sp: GridSpace) -> list[np.ndarray]:
        shifts = np.broadcast_to(np.asarray(self.shift, dtype=float), (sp.dims,))
        fields = [np.full(sp.shape, s) for s in shifts]
        if self.coriolis:
            if sp.dims != 2:
                raise DimensionError("a Coriolis shift needs a 2D grid")
            x1, x2 = sp.xs
            fields[0] = fields[0] + self.mass * self.coriolis * x2
            fields[1] = fields[1] - self.mass * self.coriolis * x1
        return fields

    def potential_values(self, sp: GridSpace) -> np.ndarray:
        v = np.zeros(sp.shape) if self.potential is None else np.asarray(self.potential(*sp.xs), dtype=float)
        return v + self.offset

    def __call__(self, psi: StateVector) -> StateVector:
        sp = psi.space
        if sp.mass != self.mass:
            raise ValueError("Hamiltonian mass differs from the grid mass")
        ops = (Op.P,) if sp.dims == 1 else (Op.P1, Op.P2)
        out = psi.position().with_amplitudes(self.potential_values(sp) * psi.position().amplitudes)
        for op, a in zip(ops, self.shift_fields(sp)):
            def d(phi, op=op, a=a):
                return apply(op, phi) + phi.position().with_amplitudes(a * phi.position().amplitudes)
            out = out + d(d(psi)) / (2 * self.mass)
        return out.as_rep(psi.rep)

    def kinetic_only(self) -> EffectiveHamiltonian:
        return EffectiveHamiltonian(self.mass, self.shift, self.coriolis, label=self.label + " kinetic")


def free_hamiltonian(mass: float, dims: int = 1) -> EffectiveHamiltonian:
    return EffectiveHamiltonian(mass, (0.0,) * dims, label="free")


def uniform_field(mass: float, g: float) -> EffectiveHamiltonian:
    """P^2/2m - m g X: the particle is pushed towards +x."""
    return EffectiveHamiltonian(mass, (0.0,), potential=lambda x: -mass * g * x, label=f"uniform field g={g}")


def analytic_effective_hamiltonian(curve: FrameCurve, t: float, mass: float) -> EffectiveHamiltonian:
    m = mass
    if curve.kind == "linear":
        c = curve.coord(t)
        g, x = curve.g, c["x"]
        if curve.order == "derivation":
            return EffectiveHamiltonian(m, (0.0,), potential=lambda X: -m * g * (X + x), label="linear accel")
        # printed order picks up -v (P - m v) from the moving translation
        v = c["v"]
        return EffectiveHamiltonian(
            m, (-2 * m * v,), potential=lambda X: -m * g * X, offset=-0.5 * m * v**2, label="linear accel (printed order)"
        )
    w, r = curve.omega, curve.radius
    return EffectiveHamiltonian(
        m,
        (0.0, 0.0),
        coriolis=w,
        potential=lambda X1, X2: -0.5 * m * w**2 * ((X1 + r) ** 2 + X2**2),
        label="rotating frame",
    )


def numeric_effective_hamiltonian(curve: FrameCurve, t: float, psi: StateVector, h: float = 1e-3) -> StateVector:
    """i [U(t+h) - U(t-h)] U(t)^-1 psi / 2h."""
    if psi.space.dims != curve.dims:
        raise DimensionError(f"{curve.kind} curve needs a {curve.dims}D grid")
    back = curve.word(t).inverse()
    up = transport(psi, curve.word(t + h) @ back)
    dn = transport(psi, curve.word(t - h) @ back)
    return 1j * (up - dn) / (2 * h)


def numeric_action(curve: FrameCurve, t: float, h: float = 1e-3) -> Action:
    return lambda psi: numeric_effective_hamiltonian(curve, t, psi, h)


def compare_mod_identity(a: Action, b: Action, states: Sequence[StateVector]) -> tuple[float, float]:
    """min over real c of max_psi |(B - A - c) psi| / |psi|; returns (residual, c)."""
    states = list(states)
    if len(states) < 2:
        raise ValueError("need at least two states")
    mat = np.stack([s.position().amplitudes.ravel() for s in states])
    if np.linalg.matrix_rank(mat, tol=1e-8 * np.abs(mat).max()) < 2:
        raise ValueError("states are linearly dependent")
    diffs = [(b(s) - a(s), s, norm(s)) for s in states]

    def worst(c):
        return max(norm(d - c * s) / n for d, s, n in diffs)

    # least-squares offset as the starting bracket; the objective is convex
    c0 = sum(inner(s, d).real for d, s, _ in diffs) / sum(n**2 for _, _, n in diffs)
    res = minimize_scalar(worst, bracket=(c0 - 1.0, c0 + 1.0), tol=1e-12)
    c = float(res.x) if res.fun <= worst(c0) else c0
    return worst(c), c



def potential_gradient(
    action: Action,
    kinetic: EffectiveHamiltonian,
    space: GridSpace,
    center,
    axis: int = 0,
    delta: float = 0.5,
    sigma: float = 1.0,
) -> float:
    """d<V>/dx_axis at `center`, where V = action - shifted kinetic part.

    Measured with Gaussians displaced by +-delta, so it is exact for
    potentials that are at most quadratic.
    """
    def mean_v(c):
        psi = gaussian(space, c, 0.0, sigma)
        return inner(psi, action(psi) - kinetic(psi)).real

    c = np.atleast_1d(np.asarray(center, dtype=float)).copy()
    lo, hi = c.copy(), c.copy()
    lo[axis] -= delta
    hi[axis] += delta
    if space.dims == 1:
        lo, hi = lo[0], hi[0]
    return (mean_v(hi) - mean_v(lo)) / (2 * delta)
