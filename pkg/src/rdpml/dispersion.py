"""Characteristic polynomials, discrete wavenumbers and the decay factor rho."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .stencil import StencilCoeffs, stencil_coefficients

__all__ = [
    "CharPoly",
    "DiscreteModeSet",
    "DampingProfile",
    "DegeneratePolynomialError",
    "DegenerateModeWarning",
    "SingularEvaluationError",
    "char_poly",
    "char_poly_coefficients",
    "discrete_wavenumbers",
    "decay_factor",
    "optimal_sigma",
    "optimal_sigma_exact",
    "dispersion_map",
    "left_sided_profile",
    "SENTINEL",
]

#: Value written by :func:`dispersion_map` where |P_p| underflows the log.
SENTINEL = float("inf")


class DegeneratePolynomialError(ValueError):
    pass


class SingularEvaluationError(ZeroDivisionError):
    pass


class DegenerateModeWarning(RuntimeWarning):
    pass


def char_poly_coefficients(a: list, lam):
    """Coefficients b_0..b_p of P_p(z) = sum_r b_r z^r from stencil weights.

    ``a`` lists a_0..a_p in any numeric type that supports + and *
    (Fractions, floats, or symbolic values); ``lam`` is added to b_0.
    """
    p = len(a) - 1
    b = []
    # b_0: a_0 + lam + 2 sum_{l=1}^{floor(p/2)} (-1)^l a_{2l}
    b0 = a[0] + lam
    for l in range(1, p // 2 + 1):
        b0 = b0 + 2 * (-1) ** l * a[2 * l]
    b.append(b0)
    for r in range(1, p + 1):
        acc = 0
        if r % 2 == 0:
            k = r // 2
            for l in range(k, p // 2 + 1):
                acc = acc + (-1) ** (l - k) * comb(l + k - 1, 2 * k - 1) * a[2 * l] * l / k
        else:
            k = (r - 1) // 2
            for l in range(k, (p + 1) // 2):
                acc = acc + (-1) ** (l - k) * comb(l + k, 2 * k) * a[2 * l + 1] * (2 * l + 1) / (2 * k + 1)
        b.append(acc)
    return b


@dataclass(frozen=True)
class CharPoly:
    """P_p(z; lambda) = sum_r b_r z^r with z = 2 cos(xi h)."""

    p: int
    lam: complex
    coeffs: tuple

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for c in reversed(self.coeffs):
            out = out * z + complex(c)
        return out

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for r in range(self.p, 0, -1):
            out = out * z + r * complex(self.coeffs[r])
        return out


def char_poly(p: int, stencil: StencilCoeffs | None = None, lam: complex = 0.0) -> CharPoly:
    """Characteristic polynomial of L_p + lam in the variable z = y + 1/y."""
    stencil = stencil_coefficients(p) if stencil is None else stencil
    if stencil.p != p:
        raise ValueError(f"stencil half-width {stencil.p} does not match p={p}")
    a = [float(c) / stencil.h ** 2 for c in stencil.rational]
    return CharPoly(p, complex(lam), tuple(complex(c) for c in char_poly_coefficients(a, lam)))


@dataclass(frozen=True)
class DiscreteModeSet:
    roots: np.ndarray
    wavenumbers: np.ndarray
    degenerate: np.ndarray = field(default_factory=lambda: np.zeros(0, bool))
    h: float = 1.0


def _principal_xi(z: complex, h: float) -> complex:
    xi = np.arccos(complex(z) / 2.0) / h
    # arccos already lands in 0 <= Re <= pi; guard the strip explicitly
    if xi.real < 0:
        xi = -xi
    if xi.real > math.pi / h:
        xi = 2 * math.pi / h - xi
    # on the strip edges both signs of Im are admissible; keep Im <= 0
    edge = 1e-12 * math.pi / h
    if abs(xi.real) <= edge or abs(xi.real - math.pi / h) <= edge:
        xi = complex(xi.real, -abs(xi.imag))
    return complex(xi)


def discrete_wavenumbers(poly: CharPoly, h: float, newton_steps: int = 3,
                         tol_degenerate: float = 1e-9) -> DiscreteModeSet:
    """All roots z_r of P_p and xi_r = acos(z_r / 2) / h on the principal strip."""
    if poly.p < 1:
        raise DegeneratePolynomialError("polynomial degree must be at least 1")
    c = np.array(poly.coeffs, dtype=complex)
    if abs(c[-1]) < 1e-300 * max(1.0, np.max(np.abs(c))):
        raise DegeneratePolynomialError("leading coefficient vanishes")
    p = poly.p
    comp = np.zeros((p, p), dtype=complex)
    comp[0, :] = -c[-2::-1] / c[-1]
    if p > 1:
        comp[1:, :-1] = np.eye(p - 1)
    roots = np.linalg.eigvals(comp)
    for _ in range(newton_steps):
        d = poly.derivative(roots)
        safe = np.abs(d) > 0
        roots = np.where(safe, roots - poly(roots) / np.where(safe, d, 1.0), roots)
    order = np.lexsort((roots.imag, roots.real))
    roots = roots[order]
    degenerate = (np.abs(roots - 2) < tol_degenerate) | (np.abs(roots + 2) < tol_degenerate)
    if p > 1:
        gaps = np.abs(roots[:, None] - roots[None, :])
        if np.any(gaps[~np.eye(p, dtype=bool)] < tol_degenerate):
            warnings.warn("characteristic polynomial has (nearly) repeated roots", DegenerateModeWarning)
    if np.any(degenerate):
        warnings.warn("root at z = +-2: polynomial-growth modes not constructed", DegenerateModeWarning)
    xi = np.array([_principal_xi(z, h) for z in roots])
    return DiscreteModeSet(roots, xi, degenerate, h)


def decay_factor(sigma, xi, omega, h: float):
    """Per-node amplitude ratio rho(sigma, xi, omega) along the stretched path."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega == 0):
        raise ValueError("omega must be nonzero")
    s = np.asarray(sigma, dtype=float) / omega
    e = np.exp(1j * np.asarray(xi, dtype=complex) * h)
    den = 2 + 1j * s * (1 - e)
    if np.any(np.abs(den) <= 1e-13 * (2 + np.abs(s) * (1 + np.abs(e)))):
        raise SingularEvaluationError("decay factor denominator vanishes")
    num = 2 + 1j * s * (1 - 1 / e)
    return num / den


def optimal_sigma(h: float) -> float:
    """Frequency-independent damping 2/h that nearly minimises |rho|."""
    if not h > 0:
        raise ValueError("h must be positive")
    return 2.0 / h


def optimal_sigma_exact(omega: float, h: float) -> float:
    """sigma* = omega sqrt(2) / sqrt(1 - cos(omega h))."""
    c = 1.0 - math.cos(omega * h)
    if c == 0.0:
        raise ZeroDivisionError("omega * h is a multiple of 2 pi")
    return abs(omega) * math.sqrt(2.0) / math.sqrt(c)


def dispersion_map(p: int, h: float, lam: complex, re_range, im_range, resolution,
                   stencil: StencilCoeffs | None = None, floor: float = 1e-12):
    """|log |P_p(2 cos(xi h); lam)|| sampled over a rectangle of complex xi.

    Returns (re_axis, im_axis, field) with field[i, j] at xi = re[j] + i im[i].
    Points with |P_p| < ``floor`` carry :data:`SENTINEL`.
    """
    nr, ni = (resolution, resolution) if np.isscalar(resolution) else resolution
    if nr < 2 or ni < 2:
        raise ValueError("resolution must be at least 2 per axis")
    stencil = stencil_coefficients(p, h) if stencil is None else stencil
    poly = char_poly(p, stencil, lam)
    re = np.linspace(re_range[0], re_range[1], int(nr))
    im = np.linspace(im_range[0], im_range[1], int(ni))
    xi = re[None, :] + 1j * im[:, None]
    val = np.abs(poly(2 * np.cos(xi * h)))
    with np.errstate(divide="ignore"):
        out = np.abs(np.log(val))
    out[val < floor] = SENTINEL
    return re, im, out


@dataclass(frozen=True)
class DampingProfile:
    """Nodal damping sequence sigma_j >= 0, zero on the physical nodes."""

    kind: str
    sigma: np.ndarray

    def __post_init__(self):
        sig = np.asarray(self.sigma, dtype=float)
        if sig.ndim != 1:
            raise ValueError("sigma must be one-dimensional")
        if np.any(sig < 0) or not np.all(np.isfinite(sig)):
            raise ValueError("sigma must be finite and non-negative")
        object.__setattr__(self, "sigma", sig)

    def __len__(self):
        return self.sigma.shape[0]

    @property
    def support(self) -> tuple[int, int] | None:
        nz = np.flatnonzero(self.sigma)
        return None if nz.size == 0 else (int(nz[0]), int(nz[-1]) + 1)

    @classmethod
    def zero(cls, n: int) -> "DampingProfile":
        return cls("custom-sequence", np.zeros(n))

    @classmethod
    def right_constant(cls, n: int, start: int, value: float, stop: int | None = None) -> "DampingProfile":
        sig = np.zeros(n)
        sig[start:stop] = value
        return cls("right-constant", sig)

    @classmethod
    def left_constant(cls, n: int, j0: int, value: float) -> "DampingProfile":
        sig = np.zeros(n)
        sig[:max(j0, 0)] = value
        return cls("left-constant", sig)

    @classmethod
    def two_sided(cls, n: int, left_end: int, right_start: int, value: float) -> "DampingProfile":
        sig = np.zeros(n)
        sig[:max(left_end, 0)] = value
        sig[right_start:] = value
        return cls("two-sided", sig)

    @classmethod
    def two_stage(cls, n: int, start: int, n_pml: int, value: float) -> "DampingProfile":
        """value on PML-relative 0 <= j <= ceil(n_pml/2), zero afterwards."""
        sig = np.zeros(n)
        sig[start:start + math.ceil(n_pml / 2) + 1] = value
        return cls("two-stage", sig)

    @classmethod
    def custom(cls, values) -> "DampingProfile":
        return cls("custom-sequence", np.asarray(values, dtype=float))


def left_sided_profile(n: int, j0: int, value: float) -> DampingProfile:
    """Damping on indices j < j0 for a layer absorbing left-travelling waves."""
    return DampingProfile.left_constant(n, j0, value)
