"""
Discretized position/momentum Hilbert spaces on periodic grids.

Units are hbar = c = 1.  Amplitudes are weighted so that discrete sums
approximate continuum integrals:

    position rep:  <phi|psi> = sum conj(phi) psi dx**dims
    momentum rep:  <phi|psi> = sum conj(phi~) psi~ dk**dims

with the momentum amplitudes approximating the unitary continuum transform
psi~(k) = (2 pi)**(-dims/2) int psi(x) exp(-i k.x) dx.  Momentum arrays are
stored in FFT order.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

# Relative amplitude allowed on the outermost samples of an admissible state.
# A Gaussian with exactly 5 sigma clearance sits at exp(-12.5) ~ 3.7e-6.
EDGE_TOLERANCE = 1e-5


class GridError(ValueError):
    """Invalid grid parameters or mismatched grids."""


class RepresentationError(ValueError):
    """A state is in the wrong representation for the requested operation."""


class DimensionError(ValueError):
    """Operator or transformation incompatible with the grid dimension."""


class AdmissibilityError(ValueError):
    """State support reaches the periodic boundary in position or momentum."""


class Rep(enum.Enum):
    POSITION = "position"
    MOMENTUM = "momentum"


class Op(enum.Enum):
    X = "X"
    X1 = "X1"
    X2 = "X2"
    P = "P"
    P1 = "P1"
    P2 = "P2"
    HFREE = "Hfree"
    K = "K"
    J = "J"


@dataclass(frozen=True, eq=False)
class GridSpace:
    dims: int
    n: int
    length: float
    mass: float

    def __post_init__(self):
        if self.dims not in (1, 2):
            raise GridError(f"dims must be 1 or 2, got {self.dims}")
        if self.n < 8:
            raise GridError(f"need at least 8 points per axis, got {self.n}")
        if not self.length > 0:
            raise GridError(f"extent must be positive, got {self.length}")
        if not self.mass > 0:
            raise GridError(f"mass must be positive, got {self.mass}")

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def dk(self) -> float:
        return 2 * np.pi / self.length

    @property
    def k_max(self) -> float:
        return np.pi * self.n / self.length

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dims

    @cached_property
    def x(self) -> np.ndarray:
        """1D position samples x_i = -L/2 + i dx."""
        return -self.length / 2 + self.dx * np.arange(self.n)

    @cached_property
    def k(self) -> np.ndarray:
        """1D signed momentum samples in FFT order."""
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    @cached_property
    def xs(self) -> tuple[np.ndarray, ...]:
        """Position sample mesh, one array per axis."""
        return tuple(np.meshgrid(*([self.x] * self.dims), indexing="ij"))

    @cached_property
    def ks(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.k] * self.dims), indexing="ij"))

    @cached_property
    def k2(self) -> np.ndarray:
        return sum(ki**2 for ki in self.ks)

    @cached_property
    def _fourier_phase(self) -> np.ndarray:
        # exp(-i k x_0) per axis, with the continuum normalization folded in
        ph = np.exp(-1j * self.k * self.x[0]) * self.dx / np.sqrt(2 * np.pi)
        out = ph
        for _ in range(self.dims - 1):
            out = np.multiply.outer(out, ph)
        return out

    @property
    def cell(self) -> float:
        return self.dx**self.dims

    @property
    def kcell(self) -> float:
        return self.dk**self.dims

    def forward(self, a: np.ndarray) -> np.ndarray:
        return np.fft.fftn(a) * self._fourier_phase

    def backward(self, a: np.ndarray) -> np.ndarray:
        return np.fft.ifftn(a / self._fourier_phase)

    def describe(self) -> dict:
        return {"dims": self.dims, "N": self.n, "L": self.length, "m": self.mass}


def make_grid(dims: int, n: int, length: float, mass: float = 1.0) -> GridSpace:
    return GridSpace(int(dims), int(n), float(length), float(mass))


@dataclass(frozen=True, eq=False)
class StateVector:
    """Immutable complex amplitudes on a grid, tagged with their representation."""

    amplitudes: np.ndarray
    rep: Rep
    space: GridSpace = field(repr=False)

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex)
        if a.shape != self.space.shape:
            raise GridError(f"amplitude shape {a.shape} != grid shape {self.space.shape}")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    def with_amplitudes(self, a: np.ndarray, rep: Rep | None = None) -> StateVector:
        return StateVector(a, rep or self.rep, self.space)

    def position(self) -> StateVector:
        return self if self.rep is Rep.POSITION else to_position(self)

    def momentum(self) -> StateVector:
        return self if self.rep is Rep.MOMENTUM else to_momentum(self)

    def as_rep(self, rep: Rep) -> StateVector:
        return self.position() if rep is Rep.POSITION else self.momentum()

    def __add__(self, other: StateVector) -> StateVector:
        _same_space(self, other)
        return self.with_amplitudes(self.amplitudes + other.as_rep(self.rep).amplitudes)

    def __sub__(self, other: StateVector) -> StateVector:
        _same_space(self, other)
        return self.with_amplitudes(self.amplitudes - other.as_rep(self.rep).amplitudes)

    def __mul__(self, c: complex) -> StateVector:
        return self.with_amplitudes(c * self.amplitudes)

    __rmul__ = __mul__

    def __truediv__(self, c: complex) -> StateVector:
        return self.with_amplitudes(self.amplitudes / c)

    def __neg__(self) -> StateVector:
        return self.with_amplitudes(-self.amplitudes)


def to_momentum(psi: StateVector) -> StateVector:
    if psi.rep is not Rep.POSITION:
        raise RepresentationError("to_momentum expects a position-representation state")
    return StateVector(psi.space.forward(psi.amplitudes), Rep.MOMENTUM, psi.space)


def to_position(psi: StateVector) -> StateVector:
    if psi.rep is not Rep.MOMENTUM:
        raise RepresentationError("to_position expects a momentum-representation state")
    return StateVector(psi.space.backward(psi.amplitudes), Rep.POSITION, psi.space)


def _same_space(a: StateVector, b: StateVector) -> None:
    if a.space is not b.space:
        raise GridError("states live on different grids")


def inner(phi: StateVector, psi: StateVector) -> complex:
    """<phi|psi>, antilinear in the first argument."""
    _same_space(phi, psi)
    psi = psi.as_rep(phi.rep)
    w = phi.space.cell if phi.rep is Rep.POSITION else phi.space.kcell
    return complex(np.vdot(phi.amplitudes, psi.amplitudes) * w)


def norm(psi: StateVector) -> float:
    w = psi.space.cell if psi.rep is Rep.POSITION else psi.space.kcell
    return float(np.sqrt(np.sum(np.abs(psi.amplitudes) ** 2) * w))


def expectation(op: Op, psi: StateVector) -> complex:
    return inner(psi, apply(op, psi)) / norm(psi) ** 2


def fidelity(phi: StateVector, psi: StateVector) -> float:
    """|<phi|psi>| / (|phi| |psi|); insensitive to global phase."""
    return abs(inner(phi, psi)) / (norm(phi) * norm(psi))


def _axis(op: Op) -> int:
    return {Op.X: 0, Op.P: 0, Op.X1: 0, Op.P1: 0, Op.X2: 1, Op.P2: 1}[op]


def apply(op: Op | str, psi: StateVector) -> StateVector:
    """Apply a generator to psi; the result keeps psi's representation."""
    op = Op(op)
    sp = psi.space
    if op in (Op.X1, Op.X2, Op.P1, Op.P2, Op.J) and sp.dims != 2:
        raise DimensionError(f"{op.value} requires a 2D grid")
    if op in (Op.X, Op.P) and sp.dims != 1:
        raise DimensionError(f"{op.value} is the 1D operator; use {op.value}1/{op.value}2 in 2D")

    if op in (Op.X, Op.X1, Op.X2):
        out = psi.position().with_amplitudes(sp.xs[_axis(op)] * psi.position().amplitudes)
    elif op in (Op.P, Op.P1, Op.P2):
        pm = psi.momentum()
        out = pm.with_amplitudes(sp.ks[_axis(op)] * pm.amplitudes)
    elif op is Op.HFREE:
        pm = psi.momentum()
        out = pm.with_amplitudes(sp.k2 / (2 * sp.mass) * pm.amplitudes)
    elif op is Op.K:
        return sp.mass * apply(Op.X if sp.dims == 1 else Op.X1, psi)
    else:  # J = X1 P2 - X2 P1
        out = apply(Op.X1, apply(Op.P2, psi)) - apply(Op.X2, apply(Op.P1, psi))
    return out.as_rep(psi.rep)


def edge_ratio(psi: StateVector, rep: Rep) -> float:
    """Largest amplitude on the outermost sample band, relative to the peak."""
    a = np.abs(psi.as_rep(rep).amplitudes)
    peak = a.max()
    if peak == 0:
        return 0.0
    if rep is Rep.MOMENTUM:
        # the band straddles +-k_max in the middle of FFT ordering
        a = np.fft.fftshift(a)
    edge = 0.0
    for ax in range(a.ndim):
        edge = max(edge, np.take(a, [0, -1], axis=ax).max())
    return float(edge / peak)


def is_admissible(psi: StateVector, tol: float = EDGE_TOLERANCE) -> bool:
    return edge_ratio(psi, Rep.POSITION) <= tol and edge_ratio(psi, Rep.MOMENTUM) <= tol


def require_admissible(psi: StateVector, what: str = "state", tol: float = EDGE_TOLERANCE) -> None:
    rx = edge_ratio(psi, Rep.POSITION)
    rk = edge_ratio(psi, Rep.MOMENTUM)
    if rx > tol or rk > tol:
        raise AdmissibilityError(
            f"{what} reaches the grid boundary (edge/peak: position {rx:.2e}, momentum {rk:.2e})"
        )


def _as_vec(v, dims: int) -> np.ndarray:
    out = np.atleast_1d(np.asarray(v, dtype=float))
    if out.size == 1 and dims > 1:
        out = np.repeat(out, dims)
    if out.shape != (dims,):
        raise DimensionError(f"expected {dims} components, got {out.shape}")
    return out


def gaussian(space: GridSpace, center_x=0.0, center_k=0.0, sigma: float = 1.0) -> StateVector:
    """Normalized Gaussian, |psi|^2 ~ exp(-(x - x0)^2 / sigma^2), mean momentum k0.

    The packet must keep 5 sigma clearance from the position box and 5/sigma
    from the momentum box, otherwise periodic wrap-around spoils the
    continuum identities the tests rely on.
    """
    if sigma <= 0:
        raise GridError("sigma must be positive")
    x0 = _as_vec(center_x, space.dims)
    k0 = _as_vec(center_k, space.dims)
    lo, hi = space.x[0], space.x[-1]
    for c in x0:
        if c - 5 * sigma < lo or c + 5 * sigma > hi:
            raise AdmissibilityError(
                f"position support [{c - 5 * sigma:g}, {c + 5 * sigma:g}] exceeds [{lo:g}, {hi:g}]"
            )
    for c in k0:
        if abs(c) + 5 / sigma >= space.k_max:
            raise AdmissibilityError(
                f"momentum support {abs(c) + 5 / sigma:g} exceeds k_max={space.k_max:g}"
            )
    arg = np.zeros(space.shape, dtype=complex)
    for xi, c, kc in zip(space.xs, x0, k0):
        arg += -((xi - c) ** 2) / (2 * sigma**2) + 1j * kc * xi
    psi = StateVector(np.exp(arg), Rep.POSITION, space)
    return psi / norm(psi)


def moments(psi: StateVector) -> dict[str, np.ndarray]:
    """Normalized <X_i>, <P_i> and <X_i^2> per axis."""
    sp = psi.space
    px = psi.position()
    pk = psi.momentum()
    wx = np.abs(px.amplitudes) ** 2
    wk = np.abs(pk.amplitudes) ** 2
    nx, nk = wx.sum(), wk.sum()
    return {
        "x": np.array([(wx * xi).sum() / nx for xi in sp.xs]),
        "k": np.array([(wk * ki).sum() / nk for ki in sp.ks]),
        "x2": np.array([(wx * xi**2).sum() / nx for xi in sp.xs]),
    }
