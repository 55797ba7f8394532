"""
Strang split-operator evolution and the Eliezer-Leach equivalence check.

One step is V/2 - K - V/2.  For a Coriolis-shifted kinetic term the kinetic
factor is exp(-i (H - w J) dt) = exp(-i H dt) exp(i w J dt), which is exact
because J commutes with the free Hamiltonian; the leftover m w^2 |X|^2 / 2
from expanding the square joins the potential.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .galilei import rotate, space_translate
from .grid import (
    AdmissibilityError,
    Rep,
    StateVector,
    fidelity,
    inner,
    is_admissible,
    moments,
    norm,
    require_admissible,
)
from .noninertial import EffectiveHamiltonian, free_hamiltonian, uniform_field

HamiltonianLike = EffectiveHamiltonian | Callable[[float], EffectiveHamiltonian]


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float
    steps: int
    record_every: int = 1
    scheme: str = "strang"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.steps < 0 or self.record_every < 1:
            raise ValueError("steps must be >= 0 and record_every >= 1")
        if self.scheme != "strang":
            raise ValueError("only the Strang scheme is implemented")

    @classmethod
    def span(cls, total: float, dt: float, record_every: int = 1) -> EvolutionConfig:
        return cls(dt, int(round(total / dt)), record_every)

    def halved(self) -> EvolutionConfig:
        return EvolutionConfig(self.dt / 2, 2 * self.steps, 2 * self.record_every)


@dataclass
class ObservableTrace:
    dims: int
    rows: list[tuple] = field(default_factory=list)

    @property
    def columns(self) -> list[str]:
        axes = ["x", "y"][: self.dims]
        return ["t", "norm", *(f"mean_{a}" for a in axes), *(f"mean_p{a}" for a in axes), "energy", "fidelity"]

    def record(self, t, psi, energy, fid=np.nan):
        mo = moments(psi)
        self.rows.append((t, norm(psi), *mo["x"], *mo["k"], energy, fid))

    def column(self, name: str) -> np.ndarray:
        return np.array([r[self.columns.index(name)] for r in self.rows], dtype=float)

    def as_array(self) -> np.ndarray:
        return np.array(self.rows, dtype=float).reshape(-1, len(self.columns))

    def __len__(self):
        return len(self.rows)


class StrangStepper:
    """Precomputed phase factors for one Hamiltonian and step size."""

    def __init__(self, ham: EffectiveHamiltonian, space, dt: float):
        if ham.mass != space.mass:
            raise ValueError("Hamiltonian mass differs from the grid mass")
        self.space = space
        self.dt = dt
        self.coriolis = ham.coriolis
        shifts = np.broadcast_to(np.asarray(ham.shift, dtype=float), (space.dims,))
        if self.coriolis and np.any(shifts):
            raise ValueError("constant and Coriolis momentum shifts cannot be combined")
        v = ham.potential_values(space)
        if self.coriolis:
            v = v + 0.5 * ham.mass * self.coriolis**2 * sum(xi**2 for xi in space.xs)
        self.half_potential = np.exp(-0.5j * dt * v)
        kin = sum((ki + s) ** 2 for ki, s in zip(space.ks, shifts)) / (2 * ham.mass)
        self.kinetic = np.exp(-1j * dt * kin)

    def step(self, psi: StateVector) -> StateVector:
        sp = self.space
        a = self.half_potential * psi.position().amplitudes
        a = sp.backward(self.kinetic * sp.forward(a))
        out = StateVector(a, Rep.POSITION, sp)
        if self.coriolis:
            # exp(+i w J dt) is a clockwise rotation by w dt
            out = rotate(out, -self.coriolis * self.dt, check=False)
        return out.with_amplitudes(self.half_potential * out.amplitudes)


def evolve(
    psi0: StateVector,
    ham: HamiltonianLike,
    cfg: EvolutionConfig,
    reference: Callable[[float], StateVector] | None = None,
    check: bool = True,
) -> tuple[StateVector, ObservableTrace]:
    """Strang evolution; a callable Hamiltonian is sampled at each step midpoint."""
    if check:
        require_admissible(psi0, "initial state")
    sp = psi0.space
    trace = ObservableTrace(sp.dims)
    static = isinstance(ham, EffectiveHamiltonian)
    stepper = StrangStepper(ham, sp, cfg.dt) if static else None

    def energy(t, psi):
        h = ham if static else ham(t)
        return inner(psi, h(psi)).real / norm(psi) ** 2

    def log(t, psi):
        fid = fidelity(reference(t), psi) if reference is not None else np.nan
        trace.record(t, psi, energy(t, psi), fid)

    psi = psi0.position()
    log(0.0, psi)
    for n in range(1, cfg.steps + 1):
        if not static:
            stepper = StrangStepper(ham((n - 0.5) * cfg.dt), sp, cfg.dt)
        psi = stepper.step(psi)
        if n % cfg.record_every == 0 or n == cfg.steps:
            if check and not is_admissible(psi):
                raise AdmissibilityError(f"packet left the admissible region at step {n}")
            log(n * cfg.dt, psi)
    return psi, trace


def eliezer_leach_map(psi: StateVector, t: float, g: float, phase_sign: float = 1.0, check: bool = True) -> StateVector:
    """Relabel x' = x + g t^2 / 2 and multiply by exp(i m g (x' t - g t^3 / 6)).

    ``phase_sign=-1`` flips the phase; it exists to show that the check is
    sensitive to it.
    """
    sp = psi.space
    moved = space_translate(psi, -0.5 * g * t**2).position()
    phase = np.exp(phase_sign * 1j * sp.mass * g * (sp.xs[0] * t - g * t**3 / 6))
    out = moved.with_amplitudes(phase * moved.amplitudes)
    if check:
        require_admissible(out, "mapped state")
    return out.as_rep(psi.rep)


def equivalence_check(
    psi0: StateVector, g: float, total: float, cfg: EvolutionConfig, phase_sign: float = 1.0
) -> float:
    """1 - |<mapped free evolution | evolution in the uniform field>|."""
    m = psi0.space.mass
    free, _ = evolve(psi0, free_hamiltonian(m), cfg)
    mapped = eliezer_leach_map(free, total, g, phase_sign)
    direct, _ = evolve(psi0, uniform_field(m, g), cfg)
    return 1.0 - fidelity(mapped, direct)


def free_gaussian_width2(sigma: float, mass: float, t: float) -> float:
    """<(X - <X>)^2> of a free Gaussian with |psi|^2 ~ exp(-x^2/sigma^2) at t=0."""
    return 0.5 * sigma**2 * (1 + (t / (mass * sigma**2)) ** 2)

