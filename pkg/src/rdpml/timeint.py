"""Fixed-step explicit Runge-Kutta integration of packed state vectors.

The default tableau is the 12-stage order-8 propagator of the Dormand-Prince
8(5,3) pair (Hairer, Norsett and Wanner, Solving ODEs I, 2nd ed., Sec. II.10),
used here in fixed-step mode without its embedded error estimators. The
coefficients are taken from SciPy's DOP853 implementation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Optional

import numpy as np

__all__ = ["ButcherTableau", "DivergenceError", "dop853", "rk4", "rk_integrate", "rk_final"]


class DivergenceError(FloatingPointError):
    def __init__(self, t: float):
        super().__init__(f"non-finite state encountered at t={t:.17g}")
        self.t = t


@dataclass(frozen=True)
class ButcherTableau:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    order: int
    name: str = ""

    @property
    def stages(self) -> int:
        return self.b.shape[0]

    def check(self, tol: float = 1e-13) -> None:
        if not np.allclose(np.triu(self.a), 0.0, atol=0.0):
            raise ValueError("tableau is not explicit")
        if abs(self.b.sum() - 1.0) > tol:
            raise ValueError("weights do not sum to one")
        if np.max(np.abs(self.a.sum(axis=1) - self.c)) > tol:
            raise ValueError("row sums of a differ from c")


def dop853() -> ButcherTableau:
    from scipy.integrate._ivp import dop853_coefficients as coef

    s = coef.N_STAGES
    a = np.array(coef.A[:s, :s], dtype=float)
    return ButcherTableau(a, np.array(coef.B, dtype=float), np.array(coef.C[:s], dtype=float), 8, "DOP853")


def rk4() -> ButcherTableau:
    a = np.zeros((4, 4))
    a[1, 0] = a[2, 1] = 0.5
    a[3, 2] = 1.0
    return ButcherTableau(a, np.array([1, 2, 2, 1]) / 6.0, np.array([0, 0.5, 0.5, 1.0]), 4, "RK4")


def _combine(w: np.ndarray, k: np.ndarray, h: float, y: np.ndarray) -> np.ndarray:
    """y + h * sum_j w_j k_j.

    einsum (without path optimisation) accumulates over j in order for each
    element, so the result does not depend on the array length or on BLAS.
    """
    acc = np.einsum("j,j...->...", w, k[:len(w)])
    acc *= h
    acc += y
    return acc


Hook = Optional[Callable[[float, np.ndarray], None]]


def rk_integrate(rhs: Callable[[float, np.ndarray], np.ndarray], y0: np.ndarray, t0: float, t1: float,
                 dt: float, stage_hook: Hook = None, tableau: ButcherTableau | None = None,
                 check_every: int = 1) -> Iterator[tuple[float, np.ndarray]]:
    """Yield (t_l, y_l) for l = 0, 1, ... with t_l = t0 + l dt; the last step is shortened to hit t1.

    ``stage_hook(t, y)`` may overwrite entries of every stage state in place
    (time-dependent Dirichlet data). The yielded array is reused between
    steps; copy it if it must be kept.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    tab = dop853() if tableau is None else tableau
    a, b, c = tab.a, tab.b, tab.c
    s = tab.stages
    y = np.array(y0, copy=True)
    if stage_hook is not None:
        stage_hook(t0, y)
    k = np.empty((s,) + y.shape, dtype=np.result_type(y, float))
    yield t0, y
    n_full = int(np.floor((t1 - t0) / dt * (1 + 1e-14)))
    steps = [dt] * n_full
    rem = (t1 - t0) - n_full * dt
    if rem > 1e-12 * dt:
        steps.append(rem)
    t = t0
    for step, h in enumerate(steps, start=1):
        for i in range(s):
            yi = _combine(a[i, :i], k, h, y) if i else y.copy()
            ti = t + c[i] * h
            if stage_hook is not None:
                stage_hook(ti, yi)
            k[i] = rhs(ti, yi)
        y = _combine(b, k, h, y)
        t = t0 + step * dt if h == dt else t1
        if stage_hook is not None:
            stage_hook(t, y)
        if step % check_every == 0 and not np.all(np.isfinite(y)):
            raise DivergenceError(t)
        yield t, y


def rk_final(rhs, y0, t0, t1, dt, stage_hook: Hook = None, tableau=None) -> np.ndarray:
    y = None
    for _, y in rk_integrate(rhs, y0, t0, t1, dt, stage_hook, tableau):
        pass
    return y
