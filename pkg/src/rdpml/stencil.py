"""Symmetric even-order finite-difference Laplacians.

Weights are generated in exact rational arithmetic and applied with a fixed
summation order, so results are reproducible bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

__all__ = [
    "StencilCoeffs",
    "Closure",
    "stencil_coefficients",
    "extend",
    "apply_laplacian_1d",
    "apply_laplacian_2d",
    "CLOSURE_KINDS",
]

#: Ghost-node rules understood by :func:`extend`.
#:
#: ``periodic``  wrap around the axis.
#: ``dirichlet`` homogeneous Dirichlet at the virtual node one past the last
#:               stored node, odd extension about it.
#: ``neumann``   even extension about the last stored node.
#: ``held``      the last stored node carries a prescribed value; odd
#:               extension about that value.
#: ``explicit``  ghost values supplied by the caller.
CLOSURE_KINDS = ("periodic", "dirichlet", "neumann", "held", "explicit")


@dataclass(frozen=True)
class StencilCoeffs:
    """Weights a_{-p..p} of the order-2p centred Laplacian.

    ``rational`` holds the h-free weights a_r h^2 for r = 0..p.
    """

    p: int
    h: float
    rational: tuple[Fraction, ...]

    @property
    def scaled(self) -> np.ndarray:
        """Float weights a_r = rational_r / h^2 for r = 0..p."""
        h2 = self.h * self.h
        return np.array([float(c) / h2 for c in self.rational])

    @property
    def weights(self) -> tuple[Fraction, ...]:
        """Full symmetric h-free weight list a_{-p}, ..., a_p."""
        half = self.rational[1:]
        return tuple(reversed(half)) + (self.rational[0],) + half

    def with_h(self, h: float) -> "StencilCoeffs":
        return StencilCoeffs(self.p, float(h), self.rational)


def _solve_fraction_system(mat: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    n = len(rhs)
    aug = [row[:] + [rhs[i]] for i, row in enumerate(mat)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [aug[i][n] for i in range(n)]


def stencil_coefficients(p: int, h: float = 1.0) -> StencilCoeffs:
    """Solve the moment system for the symmetric order-2p stencil.

    Row n (n = 0..p) reads a_0 [n = 0] / 2 + sum_r r^{2n} a_r = [n = 1],
    i.e. the h = 1 form; dividing by h^2 restores the scaling.
    """
    if not isinstance(p, (int, np.integer)) or isinstance(p, bool) or p < 1:
        raise ValueError(f"stencil half-width p must be a positive integer, got {p!r}")
    if not h > 0:
        raise ValueError(f"grid spacing h must be positive, got {h!r}")
    p = int(p)
    mat = []
    for n in range(p + 1):
        row = [Fraction(1, 2) if n == 0 else Fraction(0)]
        row += [Fraction(r) ** (2 * n) for r in range(1, p + 1)]
        mat.append(row)
    rhs = [Fraction(int(n == 1)) for n in range(p + 1)]
    sol = _solve_fraction_system(mat, rhs)
    return StencilCoeffs(p, float(h), tuple(sol))


@dataclass(frozen=True)
class Closure:
    """Ghost-node rule for the low and high end of one axis."""

    lo: str = "periodic"
    hi: str = "periodic"
    lo_values: tuple | None = None
    hi_values: tuple | None = None

    def __post_init__(self):
        for kind in (self.lo, self.hi):
            if kind not in CLOSURE_KINDS:
                raise ValueError(f"unknown closure kind {kind!r}")
        if (self.lo == "periodic") != (self.hi == "periodic"):
            raise ValueError("periodic closure must be used on both ends")

    @classmethod
    def of(cls, value) -> "Closure":
        if isinstance(value, Closure):
            return value
        if isinstance(value, str):
            return cls(value, value)
        lo, hi = value
        return cls(lo, hi)

    @property
    def periodic(self) -> bool:
        return self.lo == "periodic"


def _lo_ghosts(v: np.ndarray, g: int, kind: str, values) -> np.ndarray:
    # ghosts ordered u_{-g}, ..., u_{-1}
    if kind == "periodic":
        return v[v.shape[0] - g:]
    if kind == "dirichlet":
        inner = -v[g - 2::-1] if g > 1 else v[:0]
        zero = np.zeros_like(v[:1])
        return np.concatenate([inner, zero], axis=0)
    if kind == "neumann":
        return v[g:0:-1]
    if kind == "held":
        return 2.0 * v[:1] - v[g:0:-1]
    vals = np.asarray(values, dtype=v.dtype)
    return vals.reshape((g,) + v.shape[1:])


def _hi_ghosts(v: np.ndarray, g: int, kind: str, values) -> np.ndarray:
    # ghosts ordered u_n, ..., u_{n+g-1}
    n = v.shape[0]
    if kind == "periodic":
        return v[:g]
    if kind == "dirichlet":
        zero = np.zeros_like(v[:1])
        inner = -v[n - 1:n - g:-1] if g > 1 else v[:0]
        return np.concatenate([zero, inner], axis=0)
    if kind == "neumann":
        return v[n - 2:n - 2 - g:-1] if n - 2 - g >= 0 else v[n - 2::-1][:g]
    if kind == "held":
        return 2.0 * v[n - 1:] - (v[n - 2:n - 2 - g:-1] if n - 2 - g >= 0 else v[n - 2::-1][:g])
    vals = np.asarray(values, dtype=v.dtype)
    return vals.reshape((g,) + v.shape[1:])


def extend(v: np.ndarray, g: int, closure, axis: int = 0) -> np.ndarray:
    """Return ``v`` padded with ``g`` ghost nodes on both ends of ``axis``."""
    closure = Closure.of(closure)
    v = np.asarray(v)
    if g == 0:
        return v.copy()
    if v.shape[axis] < g + 1:
        raise ValueError(f"axis of length {v.shape[axis]} too short for {g} ghost nodes")
    w = np.moveaxis(v, axis, 0) if axis else v
    lo = _lo_ghosts(w, g, closure.lo, closure.lo_values)
    hi = _hi_ghosts(w, g, closure.hi, closure.hi_values)
    if axis:
        lo, hi = np.moveaxis(lo, 0, axis), np.moveaxis(hi, 0, axis)
    return np.concatenate([lo, v, hi], axis=axis)


def _stencil_sum(ext: np.ndarray, a: np.ndarray, p: int, n: int, axis: int = 0) -> np.ndarray:
    # a_r (v_{j+r} + v_{j-r}) for r = p..1, then a_0 v_j; in place, same rounding as the naive form
    pre = (slice(None),) * axis

    def sl(k):
        return ext[pre + (slice(k, k + n),)]

    acc = np.add(sl(2 * p), sl(0))
    acc *= a[p]
    tmp = np.empty_like(acc)
    for r in range(p - 1, 0, -1):
        np.add(sl(p + r), sl(p - r), out=tmp)
        tmp *= a[r]
        acc += tmp
    np.multiply(sl(p), a[0], out=tmp)
    acc += tmp
    return acc


def apply_laplacian_1d(v: Sequence, s: StencilCoeffs, closure="periodic") -> np.ndarray:
    """Apply L_p along axis 0 with the given ghost-node closure."""
    v = np.asarray(v)
    if v.shape[0] < 2 * s.p + 1:
        raise ValueError(f"sequence of length {v.shape[0]} shorter than the {2 * s.p + 1}-point stencil")
    ext = extend(v, s.p, closure)
    return _stencil_sum(ext, s.scaled, s.p, v.shape[0])


def apply_laplacian_2d(V, s: StencilCoeffs, closures=("periodic", "periodic"),
                       s_y: StencilCoeffs | None = None) -> np.ndarray:
    """Cross-stencil Laplacian: x-axis application plus y-axis application.

    ``s_y`` allows a different spacing along the second axis.
    """
    V = np.asarray(V)
    if V.ndim != 2:
        raise ValueError("apply_laplacian_2d expects a 2D array")
    s_y = s if s_y is None else s_y
    lx = apply_laplacian_1d(V, s, closures[0])
    ly = apply_laplacian_1d(V.T, s_y, closures[1]).T
    return lx + ly
