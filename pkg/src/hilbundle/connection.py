"""
The flat connection of the Galilean frame bundle in the constant-section basis.

With sections U(t, x, v) = U_{-t} U_{-x} U_{+v} (see ``galilei.section_word``)
the connection U dU^-1 has the closed form

    w_t = -i H,   w_x = i P,   w_v = i m (X(t) - x),   X(t) = X + t P / m,

and its curvature vanishes.  Everything here acts on states; operators are
never formed as matrices.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .galilei import section_word, time_translate, transport
from .grid import Op, StateVector, apply, inner, norm

DIRECTIONS = ("t", "x", "v")
PAIRS = (("t", "x"), ("t", "v"), ("x", "v"))
DEFAULT_STEP = 1e-3

Action = Callable[[StateVector], StateVector]


@dataclass(frozen=True)
class FrameCoord:
    t: float = 0.0
    x: float = 0.0
    v: float = 0.0

    def __post_init__(self):
        if not np.all(np.isfinite([self.t, self.x, self.v])):
            raise ValueError("frame coordinates must be finite")

    def shifted(self, direction: str, h: float) -> FrameCoord:
        vals = {"t": self.t, "x": self.x, "v": self.v}
        vals[direction] += h
        return FrameCoord(**vals)


@dataclass(frozen=True)
class ConnectionComponent:
    direction: str
    coord: FrameCoord
    action: Action

    def __call__(self, psi: StateVector) -> StateVector:
        return self.action(psi)


def heisenberg_position(psi: StateVector, t: float) -> StateVector:
    """U_t^dagger X U_t psi with U_t the free evolution exp(-i H t)."""
    return time_translate(apply(Op.X, time_translate(psi, t)), -t)


def _check_direction(direction: str) -> None:
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")


def numeric_connection(direction: str, coord: FrameCoord, psi: StateVector, h: float = DEFAULT_STEP) -> StateVector:
    """U(c) d_mu[U(c)^-1] psi by central differences in the chart coordinate."""
    _check_direction(direction)
    here = section_word(coord.t, coord.x, coord.v)
    plus = section_word(*_vals(coord.shifted(direction, h))).inverse()
    minus = section_word(*_vals(coord.shifted(direction, -h))).inverse()
    return (transport(psi, here @ plus) - transport(psi, here @ minus)) / (2 * h)


def _vals(c: FrameCoord) -> tuple[float, float, float]:
    return c.t, c.x, c.v


def analytic_connection(direction: str, coord: FrameCoord) -> ConnectionComponent:
    _check_direction(direction)
    if direction == "t":
        def action(psi):
            return -1j * apply(Op.HFREE, psi)
    elif direction == "x":
        def action(psi):
            return 1j * apply(Op.P, psi)
    else:
        def action(psi):
            m = psi.space.mass
            return 1j * m * (heisenberg_position(psi, coord.t) - coord.x * psi)
    return ConnectionComponent(direction, coord, action)


def connection_field(source: str = "numeric", h: float = DEFAULT_STEP):
    """Return w(direction, coord) -> action, from finite differences or closed form."""
    if source == "numeric":
        def w(direction, coord):
            return lambda psi: numeric_connection(direction, coord, psi, h)
    elif source == "analytic":
        def w(direction, coord):
            return analytic_connection(direction, coord).action
    else:
        raise ValueError("source must be 'numeric' or 'analytic'")
    return w


def curvature_residual(
    pair: tuple[str, str],
    coord: FrameCoord,
    psi: StateVector,
    h: float = DEFAULT_STEP,
    source: str = "analytic",
) -> StateVector:
    """(d_mu w_nu - d_nu w_mu + [w_mu, w_nu]) psi.

    Coordinate derivatives are central differences with step h.  With the
    closed-form components the derivatives are exact and the residual sits at
    round-off; with ``source="numeric"`` the components themselves carry
    O(h^2) truncation error and so does the residual.
    """
    mu, nu = pair
    _check_direction(mu)
    _check_direction(nu)
    w = connection_field(source, h)

    def d(a, b):
        # d_a w_b psi
        up = w(b, coord.shifted(a, h))(psi)
        dn = w(b, coord.shifted(a, -h))(psi)
        return (up - dn) / (2 * h)

    wm = w(mu, coord)
    wn = w(nu, coord)
    comm = wm(wn(psi)) - wn(wm(psi))
    return d(mu, nu) - d(nu, mu) + comm


def residual_scale(pair: tuple[str, str], psi: StateVector) -> float:
    """Natural size of the terms that cancel in each curvature pair."""
    if pair == ("t", "x"):
        return norm(apply(Op.HFREE, psi))
    if pair == ("t", "v"):
        return norm(apply(Op.P, psi)) / psi.space.mass
    return norm(psi)


def ccr_expectation(psi: StateVector) -> complex:
    """<psi|(XP - PX)|psi> for a normalized psi."""
    xp = apply(Op.X, apply(Op.P, psi))
    px = apply(Op.P, apply(Op.X, psi))
    return inner(psi, xp - px) / norm(psi) ** 2
