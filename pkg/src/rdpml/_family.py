"""Per-axis RDPML auxiliary family shared by the 1D and 2D right-hand sides.

With F_k = sigma_k phi_k and G_k = sigma_{k-1} psi_k the time-domain system
reads, for every axis,

    v'      += h sum_m sum_{l=1}^{p+1-m} a_{m+l-1} (G^m_{j+l} - F^m_{j-l})
    phi'^r_j = -(F^r_j + F^r_{j-1})/2
               - sum_{l=1}^{r-1} (F^{r-l}_{j-1-l} - F^{r-l}_{j+1-l})/2
               - (u_{j-r+2} - u_{j-r}) / 2h
    psi'^r_j = -(G^r_j + G^r_{j+1})/2
               - sum_{l=1}^{r-1} (G^{r-l}_{j+l+1} - G^{r-l}_{j+l-1})/2
               - (u_{j+r} - u_{j+r-2}) / 2h

Auxiliary unknowns live on "segments": maximal runs of consecutive (modular
for periodic axes) indices. Ghost values of F and G beyond a non-periodic end
come from the closure:

    dirichlet  F_{-m} = 0,        G_{n-1+m} = 0
    neumann    F_{-m} = -G_m,     G_{n-1+m} = -F_{n-1-m}
    held       zero (sigma must vanish within p nodes of the end)

and the face variable next to a Dirichlet or Neumann end (phi at n-1, psi at
0) is frozen: its equation is dropped and it is never read.
"""
from __future__ import annotations

import numpy as np

from .stencil import Closure

__all__ = ["AxisFamily", "UnsupportedOrderError", "InvalidConfigurationError"]


class UnsupportedOrderError(NotImplementedError):
    pass


class InvalidConfigurationError(ValueError):
    pass


def _runs(mask: np.ndarray, periodic: bool) -> list[np.ndarray]:
    n = mask.shape[0]
    if mask.all():
        return [np.arange(n)]
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(idx) > 1) + 1
    runs = np.split(idx, breaks)
    if periodic and len(runs) > 1 and runs[0][0] == 0 and runs[-1][-1] == n - 1:
        runs = [np.concatenate([runs[-1], runs[0]])] + runs[1:-1]
    return runs


def _dilate(mask: np.ndarray, g: int, periodic: bool) -> np.ndarray:
    n = mask.shape[0]
    out = mask.copy()
    for s in range(1, g + 1):
        if periodic:
            out |= np.roll(mask, s) | np.roll(mask, -s)
        else:
            out[s:] |= mask[:-s] if s < n else False
            out[:-s] |= mask[s:] if s < n else False
    return out


class AxisFamily:
    """Static index maps and the evaluation kernel for one axis family.

    ``region`` is ``"full"`` (auxiliaries on every node) or ``"support"``
    (only on the sigma-support dilated by p; exact, since auxiliaries
    elsewhere are never read).
    """

    def __init__(self, n: int, h: float, p: int, a: np.ndarray, sigma, closure, region: str = "full"):
        closure = Closure.of(closure)
        if "explicit" in (closure.lo, closure.hi):
            raise InvalidConfigurationError("RDPML needs a ghost rule for F/G; explicit closures are not supported")
        if region not in ("full", "support"):
            raise ValueError(f"unknown aux region {region!r}")
        sigma = np.asarray(sigma, dtype=float)
        if sigma.shape != (n,):
            raise InvalidConfigurationError(f"sigma has shape {sigma.shape}, expected ({n},)")
        if np.any(sigma < 0) or not np.all(np.isfinite(sigma)):
            raise InvalidConfigurationError("sigma must be finite and non-negative")
        if n < 2 * p + 1:
            raise InvalidConfigurationError(f"{n} nodes cannot carry a {2 * p + 1}-point stencil")
        self.n, self.h, self.p, self.a = n, float(h), p, np.asarray(a, dtype=float)
        self.closure = closure
        self.periodic = closure.periodic
        self.sigma = sigma
        sig_g = np.empty(n)
        sig_g[1:] = sigma[:-1]
        sig_g[0] = sigma[-1] if self.periodic else 0.0
        self.sigma_g = sig_g
        self.coupled = bool(np.any(sigma > 0))
        self._check_ends()

        if region == "full":
            mask = np.ones(n, bool)
        else:
            mask = _dilate((sigma > 0) | (sig_g > 0), p, self.periodic)
        self.segments = _runs(mask, self.periodic)
        self.rows = np.concatenate(self.segments) if self.segments else np.zeros(0, int)
        self.size = self.rows.shape[0]
        self._build_maps()

    # -- configuration checks -------------------------------------------------
    def _check_ends(self):
        p, sig = self.p, self.sigma
        if self.periodic:
            return
        for end, kind, near in (("low", self.closure.lo, sig[:p + 1]), ("high", self.closure.hi, sig[-p - 1:])):
            if not np.any(near > 0):
                continue
            if kind == "held":
                raise InvalidConfigurationError(f"sigma must vanish within {p} nodes of the held {end} end")
            if p > 2:
                raise UnsupportedOrderError(
                    f"{kind} termination of a damped layer is only available for p <= 2 (got p={p})")

    # -- static gathers ---------------------------------------------------------
    def _build_maps(self):
        n, p, R = self.n, self.p, self.size
        pos = -np.ones(n, int)
        pos[self.rows] = np.arange(R)
        # X = [F (R), G (R), -F (R), -G (R), 0]
        zero = 4 * R
        lo, hi = self.closure.lo, self.closure.hi

        def f_src(j):
            if self.periodic:
                j %= n
            if 0 <= j < n:
                return pos[j] if pos[j] >= 0 else zero
            if lo == "neumann":
                m = -j
                return 3 * R + pos[m] if 0 <= m < n and pos[m] >= 0 else zero
            return zero

        def g_src(j):
            if self.periodic:
                j %= n
            if 0 <= j < n:
                return R + pos[j] if pos[j] >= 0 else zero
            if hi == "neumann":
                m = 2 * (n - 1) - j
                return 2 * R + pos[m] if 0 <= m < n and pos[m] >= 0 else zero
            return zero

        self.maps = []
        start = 0
        for seg in self.segments:
            L = seg.shape[0]
            j0 = int(seg[0])
            q = np.arange(-p, L + p)
            glob = j0 + q
            if self.periodic:
                uidx = glob % n + p
            else:
                uidx = glob + p
            fidx = np.array([f_src(int(j)) for j in glob[:L + p]])
            gidx = np.array([g_src(int(j)) for j in glob[p:]])
            local = slice(start, start + L)
            self.maps.append((local, seg, uidx, fidx, gidx))
            start += L
        self.frozen_phi = np.zeros(R, bool)
        self.frozen_psi = np.zeros(R, bool)
        if hi in ("dirichlet", "neumann") and pos[n - 1] >= 0:
            self.frozen_phi[pos[n - 1]] = True
        if lo in ("dirichlet", "neumann") and pos[0] >= 0:
            self.frozen_psi[pos[0]] = True
        self.sig_f_loc = self.sigma[self.rows]
        self.sig_g_loc = self.sigma_g[self.rows]

    # -- kernel ---------------------------------------------------------------
    def evaluate(self, u_ext: np.ndarray, phi: np.ndarray, psi: np.ndarray,
                 dv: np.ndarray, dphi: np.ndarray, dpsi: np.ndarray) -> None:
        """Add the coupling to ``dv`` and write the auxiliary derivatives.

        ``u_ext`` carries p ghost rows on both ends of axis 0 (closure applied);
        ``phi``/``psi``/``dphi``/``dpsi`` have shape (p, size, ...).
        """
        if self.size == 0:
            return
        p, h, a = self.p, self.h, self.a
        trail = (1,) * (phi.ndim - 2)
        sf = self.sig_f_loc.reshape((-1,) + trail)
        sg = self.sig_g_loc.reshape((-1,) + trail)
        F = sf * phi
        G = sg * psi
        X = np.concatenate([F, G, -F, -G, np.zeros_like(F[:, :1])], axis=1)
        inv2h = 1.0 / (2.0 * h)
        for local, seg, uidx, fidx, gidx in self.maps:
            L = seg.shape[0]
            ue = u_ext[uidx]
            Fe = X[:, fidx]       # local q = -p..L-1 at offset p
            Ge = X[:, gidx]       # local q = 0..L-1+p at offset 0
            for r in range(1, p + 1):
                acc = -(Fe[r - 1, p:p + L] + Fe[r - 1, p - 1:p - 1 + L]) * 0.5
                for l in range(1, r):
                    acc = acc - (Fe[r - l - 1, p - 1 - l:p - 1 - l + L] - Fe[r - l - 1, p + 1 - l:p + 1 - l + L]) * 0.5
                dphi[r - 1, local] = acc - (ue[p - r + 2:p - r + 2 + L] - ue[p - r:p - r + L]) * inv2h
                acc = -(Ge[r - 1, 0:L] + Ge[r - 1, 1:1 + L]) * 0.5
                for l in range(1, r):
                    acc = acc - (Ge[r - l - 1, l + 1:l + 1 + L] - Ge[r - l - 1, l - 1:l - 1 + L]) * 0.5
                dpsi[r - 1, local] = acc - (ue[p + r:p + r + L] - ue[p + r - 2:p + r - 2 + L]) * inv2h
            if self.coupled:
                cpl = None
                for m in range(1, p + 1):
                    for l in range(1, p + 2 - m):
                        term = a[m + l - 1] * (Ge[m - 1, l:l + L] - Fe[m - 1, p - l:p - l + L])
                        cpl = term if cpl is None else cpl + term
                dv[seg] += h * cpl
        dphi[:, self.frozen_phi] = 0.0
        dpsi[:, self.frozen_psi] = 0.0
