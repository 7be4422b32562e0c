"""Semi-discrete 1D wave equation with reflectionless discrete PML.

The state is packed into one flat vector

    [u (n) | v (n) | phi^(1..p) (p*R) | psi^(1..p) (p*R)]

where R is the number of nodes carrying auxiliary variables (all n for
``aux_region="full"``, the sigma-support dilated by p for ``"support"``).
``phi`` blocks are stored r-major: entry (r, i) sits at 2n + (r-1) R + i and
refers to grid node ``model.aux_rows[i]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._family import AxisFamily, InvalidConfigurationError, UnsupportedOrderError
from .dispersion import DampingProfile
from .stencil import Closure, StencilCoeffs, _stencil_sum, extend, stencil_coefficients

__all__ = [
    "Grid1D",
    "State1D",
    "RDPML1D",
    "rhs_1d",
    "plain_rhs_1d",
    "periodic_closure_1d",
    "InvalidConfigurationError",
    "UnsupportedOrderError",
]


@dataclass(frozen=True)
class Grid1D:
    """Nodes x_j = x0 + j h, j = 0..n-1, with a closure on each end."""

    x0: float
    h: float
    n: int
    bc: Closure = field(default_factory=Closure)

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")
        object.__setattr__(self, "bc", Closure.of(self.bc))

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(self.n)

    def index_of(self, x: float) -> int:
        j = (x - self.x0) / self.h
        jr = int(round(j))
        if abs(j - jr) > 1e-9:
            raise InvalidConfigurationError(f"x={x} is not a grid node")
        return jr


@dataclass
class State1D:
    u: np.ndarray
    v: np.ndarray
    phi: np.ndarray  # (p, n)
    psi: np.ndarray  # (p, n)


def _sigma_array(sigma, n: int) -> np.ndarray:
    if sigma is None:
        return np.zeros(n)
    if isinstance(sigma, DampingProfile):
        sigma = sigma.sigma
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (n,):
        raise InvalidConfigurationError(f"damping profile of length {sigma.shape} on a grid of {n} nodes")
    return sigma


class RDPML1D:
    def __init__(self, grid: Grid1D, p: int, sigma=None, aux_region: str = "full",
                 stencil: StencilCoeffs | None = None):
        self.grid = grid
        self.p = int(p)
        self.stencil = stencil_coefficients(p, grid.h) if stencil is None else stencil
        if self.stencil.p != self.p:
            raise InvalidConfigurationError("stencil order does not match p")
        self.a = self.stencil.scaled
        self.sigma = _sigma_array(sigma, grid.n)
        self.family = AxisFamily(grid.n, grid.h, self.p, self.a, self.sigma, grid.bc, aux_region)
        n, R = grid.n, self.family.size
        self.n, self.aux_rows = n, self.family.rows
        self.size = 2 * n + 2 * self.p * R

    # -- packing ----------------------------------------------------------------
    def pack(self, u, v=None, phi=None, psi=None) -> np.ndarray:
        n, p, R = self.n, self.p, self.family.size
        u = np.asarray(u)
        dtype = np.result_type(u, float if v is None else np.asarray(v), float)
        y = np.zeros(self.size, dtype=dtype)
        y[:n] = u
        if v is not None:
            y[n:2 * n] = v
        for k, w in ((0, phi), (1, psi)):
            if w is not None:
                w = np.asarray(w)
                blk = w[:, self.aux_rows] if w.shape[-1] == n else w
                y[2 * n + k * p * R:2 * n + (k + 1) * p * R] = blk.reshape(-1)
        return y

    def views(self, y: np.ndarray):
        n, p, R = self.n, self.p, self.family.size
        u = y[:n]
        v = y[n:2 * n]
        phi = y[2 * n:2 * n + p * R].reshape(p, R)
        psi = y[2 * n + p * R:].reshape(p, R)
        return u, v, phi, psi

    def unpack(self, y: np.ndarray) -> State1D:
        u, v, phi, psi = self.views(y)
        full_phi = np.zeros((self.p, self.n), dtype=y.dtype)
        full_psi = np.zeros_like(full_phi)
        full_phi[:, self.aux_rows] = phi
        full_psi[:, self.aux_rows] = psi
        return State1D(u.copy(), v.copy(), full_phi, full_psi)

    def initial_state(self, u0, v0=None) -> np.ndarray:
        return self.pack(u0, v0)

    # -- right-hand side --------------------------------------------------------
    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        n, p = self.n, self.p
        u, v, phi, psi = self.views(y)
        dy = np.empty_like(y)
        du, dv, dphi, dpsi = self.views(dy)
        du[:] = v
        u_ext = extend(u, p, self.grid.bc)
        dv[:] = _stencil_sum(u_ext, self.a, p, n)
        self.family.evaluate(u_ext, phi, psi, dv, dphi, dpsi)
        return dy

    __call__ = rhs


def rhs_1d(state: State1D, grid: Grid1D, sigma, s: StencilCoeffs) -> State1D:
    """Functional form: time derivative of a full-grid :class:`State1D`."""
    model = RDPML1D(grid, s.p, sigma, "full", s)
    return model.unpack(model.rhs(0.0, model.pack(state.u, state.v, state.phi, state.psi)))


def plain_rhs_1d(grid: Grid1D, s: StencilCoeffs):
    """Method-of-lines right-hand side for the packed state [u | v] without PML."""
    n, p, a, bc = grid.n, s.p, s.scaled, grid.bc

    def rhs(t, y):
        dy = np.empty_like(y)
        dy[:n] = y[n:]
        dy[n:] = _stencil_sum(extend(y[:n], p, bc), a, p, n)
        return dy

    return rhs


def periodic_closure_1d(state: State1D, p: int) -> dict[str, np.ndarray]:
    """Ghost-extended copies of u, phi and psi under the periodic wrap."""
    return {
        "u": extend(state.u, p, "periodic"),
        "phi": np.stack([extend(w, p, "periodic") for w in state.phi]),
        "psi": np.stack([extend(w, p, "periodic") for w in state.psi]),
    }
