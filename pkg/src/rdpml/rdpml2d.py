"""Semi-discrete 2D wave equation with per-axis RDPML auxiliary families.

Packed layout: [u (nx*ny) | v (nx*ny) | phi_x | psi_x | phi_y | psi_y].
The x family is stored as (p, Rx, ny) over the rows ``model.fx.rows``; the
y family as (p, Ry, nx) over the columns ``model.fy.rows`` (stored
transposed, so each family is swept along its own leading axis).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._family import AxisFamily, InvalidConfigurationError, UnsupportedOrderError
from .dispersion import DampingProfile
from .stencil import Closure, StencilCoeffs, _stencil_sum, extend, stencil_coefficients

__all__ = ["Grid2D", "State2D", "RDPML2D", "plain_rhs_2d", "InvalidConfigurationError", "UnsupportedOrderError"]


@dataclass(frozen=True)
class Grid2D:
    x0: float
    y0: float
    h1: float
    h2: float
    nx: int
    ny: int
    bc_x: Closure = field(default_factory=Closure)
    bc_y: Closure = field(default_factory=Closure)

    def __post_init__(self):
        if not (self.h1 > 0 and self.h2 > 0):
            raise ValueError("spacings must be positive")
        object.__setattr__(self, "bc_x", Closure.of(self.bc_x))
        object.__setattr__(self, "bc_y", Closure.of(self.bc_y))

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.h1 * np.arange(self.nx)

    @property
    def y(self) -> np.ndarray:
        return self.y0 + self.h2 * np.arange(self.ny)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    def transposed(self) -> "Grid2D":
        return Grid2D(self.y0, self.x0, self.h2, self.h1, self.ny, self.nx, self.bc_y, self.bc_x)


@dataclass
class State2D:
    u: np.ndarray
    v: np.ndarray
    phi_x: np.ndarray  # (p, nx, ny)
    psi_x: np.ndarray
    phi_y: np.ndarray  # (p, nx, ny)
    psi_y: np.ndarray


def _sig(sigma, n):
    if sigma is None:
        return np.zeros(n)
    if isinstance(sigma, DampingProfile):
        sigma = sigma.sigma
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (n,):
        raise InvalidConfigurationError(f"damping profile of length {sigma.shape} on an axis of {n} nodes")
    return sigma


class RDPML2D:
    """Right-hand side of the 2D system; each axis uses its own spacing."""

    def __init__(self, grid: Grid2D, p: int, sigma_x=None, sigma_y=None, aux_region: str = "support"):
        self.grid, self.p = grid, int(p)
        self.sx = stencil_coefficients(p, grid.h1)
        self.sy = stencil_coefficients(p, grid.h2)
        self.ax, self.ay = self.sx.scaled, self.sy.scaled
        self.sigma_x = _sig(sigma_x, grid.nx)
        self.sigma_y = _sig(sigma_y, grid.ny)
        self.fx = AxisFamily(grid.nx, grid.h1, self.p, self.ax, self.sigma_x, grid.bc_x, aux_region)
        self.fy = AxisFamily(grid.ny, grid.h2, self.p, self.ay, self.sigma_y, grid.bc_y, aux_region)
        nx, ny, p = grid.nx, grid.ny, self.p
        self.N = nx * ny
        self.kx = p * self.fx.size * ny
        self.ky = p * self.fy.size * nx
        self.size = 2 * self.N + 2 * self.kx + 2 * self.ky
        self.coupled = self.fx.coupled or self.fy.coupled

    def views(self, y: np.ndarray):
        nx, ny, p, N = self.grid.nx, self.grid.ny, self.p, self.N
        o = 2 * N
        u = y[:N].reshape(nx, ny)
        v = y[N:o].reshape(nx, ny)
        px = y[o:o + self.kx].reshape(p, self.fx.size, ny)
        o += self.kx
        qx = y[o:o + self.kx].reshape(p, self.fx.size, ny)
        o += self.kx
        py = y[o:o + self.ky].reshape(p, self.fy.size, nx)
        o += self.ky
        qy = y[o:o + self.ky].reshape(p, self.fy.size, nx)
        return u, v, px, qx, py, qy

    def pack(self, u, v=None) -> np.ndarray:
        u = np.asarray(u)
        dtype = np.result_type(u, float if v is None else np.asarray(v), float)
        y = np.zeros(self.size, dtype=dtype)
        uu, vv = self.views(y)[:2]
        uu[...] = u
        if v is not None:
            vv[...] = v
        return y

    def unpack(self, y: np.ndarray) -> State2D:
        u, v, px, qx, py, qy = self.views(y)
        p, (nx, ny) = self.p, self.grid.shape
        out = [np.zeros((p, nx, ny), dtype=y.dtype) for _ in range(4)]
        out[0][:, self.fx.rows, :] = px
        out[1][:, self.fx.rows, :] = qx
        out[2][:, :, self.fy.rows] = py.transpose(0, 2, 1)
        out[3][:, :, self.fy.rows] = qy.transpose(0, 2, 1)
        return State2D(u.copy(), v.copy(), *out)

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        g, p = self.grid, self.p
        u, v, px, qx, py, qy = self.views(y)
        dy = np.empty_like(y)
        du, dv, dpx, dqx, dpy, dqy = self.views(dy)
        du[...] = v
        ux = extend(u, p, g.bc_x)
        uyc = extend(u, p, g.bc_y, axis=1)
        uy = uyc.T
        lap = _stencil_sum(ux, self.ax, p, g.nx)
        lap += _stencil_sum(uyc, self.ay, p, g.ny, axis=1)
        if self.coupled:
            c = np.zeros_like(lap)
            self.fx.evaluate(ux, px, qx, c, dpx, dqx)
            self.fy.evaluate(uy, py, qy, c.T, dpy, dqy)
            dv[...] = lap + c
        else:
            self.fx.evaluate(ux, px, qx, None, dpx, dqx)
            self.fy.evaluate(uy, py, qy, None, dpy, dqy)
            dv[...] = lap
        return dy

    __call__ = rhs


def plain_rhs_2d(grid: Grid2D, p: int):
    """Method-of-lines right-hand side for the packed state [u | v] without PML."""
    ax = stencil_coefficients(p, grid.h1).scaled
    ay = stencil_coefficients(p, grid.h2).scaled
    nx, ny = grid.shape
    N = nx * ny

    def rhs(t, y):
        dy = np.empty_like(y)
        dy[:N] = y[N:]
        u = y[:N].reshape(nx, ny)
        lap = _stencil_sum(extend(u, p, grid.bc_x), ax, p, nx)
        lap += _stencil_sum(extend(u, p, grid.bc_y, axis=1), ay, p, ny, axis=1)
        dy[N:] = lap.reshape(-1)
        return dy

    return rhs
