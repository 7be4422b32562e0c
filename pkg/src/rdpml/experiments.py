"""Experiment harness: configurations, runners, error series and CSV output.

Every runner returns an :class:`ExperimentResult` holding the error series,
summary rows and threshold checks; :func:`run` additionally writes CSV files.
"""
from __future__ import annotations

import csv
import dataclasses
import math
import os
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dispersion import DampingProfile
from .helmholtz import assemble_full, assemble_reduced, c_inverse, solve
from .rdpml1d import Grid1D, RDPML1D, plain_rhs_1d
from .rdpml2d import Grid2D, RDPML2D, plain_rhs_2d
from .stencil import stencil_coefficients
from .timeint import rk_integrate

__all__ = [
    "EXPERIMENTS",
    "ConfigError",
    "ExperimentConfig",
    "ErrorSeries",
    "Check",
    "ExperimentResult",
    "default_config",
    "parse_config",
    "emit_config",
    "run",
    "run_convergence_1d",
    "run_reflect_1d",
    "run_reflect_2d",
    "run_pml_width_2d",
    "run_waveguide",
    "run_evanescent",
    "run_helmholtz_compare",
    "reference_solution",
    "dalembert",
    "gaussian_1d",
    "bump_2d",
    "zero_crossings",
    "fmt",
]

EXPERIMENTS = ("convergence1d", "reflect1d", "reflect2d", "pml-width-2d", "waveguide", "evanescent",
               "helmholtz-compare")


class ConfigError(ValueError):
    pass


def fmt(x: float) -> str:
    """17 significant digits in scientific notation."""
    return f"{x:.16e}"


# ----------------------------------------------------------------------------
# configuration
# ----------------------------------------------------------------------------
@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    orders: tuple = (1, 2, 3, 4)
    hs: tuple = ()
    h: float = 2.0 ** -6
    h1: float = 0.15
    h2: float = 0.2
    sigma: str = "2/h"
    t_final: float = 10.0
    dt_factor: float = 8.0
    omega: float = 5.0
    pml_length: float = 4.0
    pml_short: float = 4.0
    domain: float = 6.0
    ref_pad: float = 5.0
    trace: str = "both"
    ns: tuple = (64,)
    omegas: tuple = (3.0, 5.0, 10.0)
    aux_region: str = "support"
    threshold: float = 1e-10
    ratio: float = 10.0
    seed: int = 0
    snapshot: bool = True
    outdir: str = "results"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")

    def replace(self, **kw) -> "ExperimentConfig":
        return dataclasses.replace(self, **kw)


_DEFAULTS = {
    "convergence1d": dict(orders=(1, 2, 3, 4), hs=(2.0 ** -3, 2.0 ** -4, 2.0 ** -5, 2.0 ** -6), sigma="2/sqrt(h)",
                          t_final=10.0, dt_factor=8.0, pml_length=4.0, domain=6.0, threshold=0.4),
    "reflect1d": dict(orders=(1, 2, 3, 4), h=2.0 ** -6, sigma="2/sqrt(h)", t_final=10.0, dt_factor=8.0,
                      pml_length=10.0, pml_short=4.0, domain=6.0, ref_pad=5.0, threshold=1e-10, ratio=10.0),
    "reflect2d": dict(orders=(1, 2, 3, 4), h=2.0 ** -5, sigma="2/h", t_final=3.0, dt_factor=16.0,
                      pml_length=0.2, domain=4.0, ref_pad=1.0, threshold=1e-9),
    "pml-width-2d": dict(orders=(1, 2, 3, 4), hs=(2.0 ** -3, 2.0 ** -4, 2.0 ** -5, 2.0 ** -6), sigma="2/h",
                         t_final=3.0, dt_factor=16.0, pml_length=0.2, domain=4.0, ref_pad=1.0, threshold=1e-9),
    "waveguide": dict(orders=(1, 2), h1=0.15, h2=0.2, sigma="2/h", t_final=63.0, dt_factor=8.0, omega=5.0,
                      pml_length=5.0, domain=30.0, ref_pad=40.0, threshold=1e-10, ratio=0.25),
    "evanescent": dict(orders=(2,), h1=0.08, h2=0.08, sigma="both", t_final=20.0, dt_factor=8.0, omega=5.0,
                       pml_length=2.0, domain=0.48, ref_pad=15.0, trace="both", threshold=1e-10, ratio=10.0),
    "helmholtz-compare": dict(orders=(1, 2), ns=(64,), omegas=(3.0, 5.0, 10.0), h=0.1, threshold=1e-10),
}


def default_config(experiment: str, **overrides) -> ExperimentConfig:
    if experiment not in _DEFAULTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    kw = dict(_DEFAULTS[experiment])
    kw.update(overrides)
    return ExperimentConfig(experiment=experiment, **kw)


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_POW = re.compile(r"^\s*(-?\d+(?:\.\d*)?)\s*(?:\^|\*\*)\s*\(?\s*(-?\d+)\s*\)?\s*$")


def _num(text: str) -> float:
    m = _POW.match(text)
    if m:
        return float(m.group(1)) ** int(m.group(2))
    return float(text)


def _convert(name: str, text: str):
    if name not in _FIELDS:
        raise ConfigError(f"unknown configuration key {name!r}")
    default = _FIELDS[name].default
    text = text.strip()
    try:
        if isinstance(default, bool):
            if text.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return text.lower() in ("true", "1", "yes")
        if isinstance(default, tuple):
            items = [t for t in text.replace(" ", "").split(",") if t]
            conv = int if name == "orders" or name == "ns" else _num
            return tuple(conv(t) for t in items)
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return _num(text)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {text!r}") from exc
    return text


def parse_config(text: str, overrides: dict | None = None) -> ExperimentConfig:
    """Parse flat ``key = value`` text (``#`` comments) into a config.

    Missing keys take the experiment's defaults; ``overrides`` (raw strings)
    win over the file.
    """
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        k, v = line.split("=", 1)
        raw[k.strip().replace("-", "_")] = v.strip()
    for k, v in (overrides or {}).items():
        raw[k.replace("-", "_")] = str(v)
    if "experiment" not in raw:
        raise ConfigError("configuration must name an experiment")
    exp = raw.pop("experiment")
    return default_config(exp, **{k: _convert(k, v) for k, v in raw.items()})


def emit_config(cfg: ExperimentConfig) -> str:
    lines = [f"experiment = {cfg.experiment}"]
    for name in _FIELDS:
        if name == "experiment":
            continue
        val = getattr(cfg, name)
        if isinstance(val, tuple):
            text = ",".join(repr(v) for v in val)
        elif isinstance(val, float):
            text = repr(val)
        else:
            text = str(val)
        lines.append(f"{name} = {text}")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------------
# results
# ----------------------------------------------------------------------------
@dataclass
class ErrorSeries:
    times: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape:
            raise ValueError("times and values differ in length")
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if np.any(self.values < 0):
            raise ValueError("errors must be non-negative")

    @property
    def max(self) -> float:
        return float(self.values.max()) if self.values.size else 0.0

    def window(self, t0: float = -math.inf, t1: float = math.inf) -> "ErrorSeries":
        m = (self.times >= t0 - 1e-12) & (self.times <= t1 + 1e-12)
        return ErrorSeries(self.times[m], self.values[m], dict(self.meta))

    def envelope(self) -> np.ndarray:
        return np.maximum.accumulate(self.values) if self.values.size else self.values


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    comparison: str = "<="


@dataclass
class ExperimentResult:
    experiment: str
    series: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    snapshots: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name, value, threshold, comparison="<="):
        ok = {"<=": value <= threshold, ">=": value >= threshold, "<": value < threshold}[comparison]
        self.checks.append(Check(name, float(value), float(threshold), bool(ok), comparison))


# ----------------------------------------------------------------------------
# initial data and exact solutions
# ----------------------------------------------------------------------------
def gaussian_1d(x):
    """Truncated Gaussian e^{-10 (x+3)^2} on |x+3| <= 2."""
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x + 3) <= 2, np.exp(-10 * (x + 3) ** 2), 0.0)


def dalembert(x, t, g0=gaussian_1d):
    return 0.5 * (g0(np.asarray(x) - t) + g0(np.asarray(x) + t))


def bump_2d(X, Y, center=(-2.0, -2.0)):
    r2 = (X - center[0]) ** 2 + (Y - center[1]) ** 2
    return np.where(r2 <= 0.25, np.exp(-140 * r2), 0.0)


def _sigma_value(preset: str, h: float) -> float:
    preset = preset.replace(" ", "")
    if preset == "2/h":
        return 2.0 / h
    if preset in ("2/sqrt(h)", "2/sqrth"):
        return 2.0 / math.sqrt(h)
    try:
        return float(preset)
    except ValueError as exc:
        raise ConfigError(f"unknown sigma preset {preset!r}") from exc


def _steps(dt_factor: float, h: float) -> float:
    return h / dt_factor


def _nodes(length: float, h: float, what: str) -> int:
    n = length / h
    nr = int(round(n))
    if abs(n - nr) > 1e-9 * max(1.0, n):
        raise ConfigError(f"{what} of length {length} is not a multiple of h={h}")
    return nr


def _lockstep(rhs_a, ya, rhs_b, yb, t1, dt, observe, hook_a=None, hook_b=None):
    """Advance two systems with identical steps and call observe(t, ya, yb)."""
    ga = rk_integrate(rhs_a, ya, 0.0, t1, dt, hook_a)
    gb = rk_integrate(rhs_b, yb, 0.0, t1, dt, hook_b)
    for (ta, a), (tb, b) in zip(ga, gb):
        observe(ta, a, b)


# ----------------------------------------------------------------------------
# 1D experiments
# ----------------------------------------------------------------------------
def _model_1d(p, h, domain, pml_length, sigma_value, aux_region):
    n = _nodes(domain + pml_length, h, "computational domain")
    j0 = _nodes(domain, h, "physical domain")
    grid = Grid1D(-domain, h, n, "periodic")
    sig = DampingProfile.right_constant(n, j0, sigma_value)
    return RDPML1D(grid, p, sig, aux_region), j0


def run_convergence_1d(cfg: ExperimentConfig) -> ExperimentResult:
    res = ExperimentResult(cfg.experiment)
    hs = sorted(cfg.hs, reverse=True)
    table = []
    for p in cfg.orders:
        errs = []
        for h in hs:
            model, j0 = _model_1d(p, h, cfg.domain, cfg.pml_length, _sigma_value(cfg.sigma, h), cfg.aux_region)
            x = model.grid.x[:j0 + 1]
            y0 = model.initial_state(gaussian_1d(model.grid.x))
            times, vals = [], []
            for t, y in rk_integrate(model.rhs, y0, 0.0, cfg.t_final, _steps(cfg.dt_factor, h)):
                times.append(t)
                vals.append(float(np.max(np.abs(y[:j0 + 1] - dalembert(x, t)))))
            s = ErrorSeries(times, vals, {"p": p, "h": h})
            res.series[(p, h)] = s
            errs.append(s.max)
        slope = float(np.polyfit(np.log(hs), np.log(errs), 1)[0])
        for h, e in zip(hs, errs):
            table.append((p, h, e, slope))
            res.rows.append({"experiment": cfg.experiment, "p": p, "h": h, "metric": "E_h", "value": e})
        res.rows.append({"experiment": cfg.experiment, "p": p, "h": "", "metric": "slope", "value": slope})
        res.check(f"p={p} slope-2p", abs(slope - 2 * p), cfg.threshold)
    res.tables["convergence"] = (["p", "h", "E_h", "fitted_slope"], table)
    return res


def reference_solution(cfg: ExperimentConfig, p: int, h: float):
    """Plain scheme on the enlarged periodic domain; returns (rhs, y0, offset).

    ``offset`` is the index of the physical origin -domain on the reference grid.
    """
    if cfg.experiment in ("convergence1d", "reflect1d"):
        lo = -cfg.domain - cfg.ref_pad
        hi = cfg.ref_pad
        n = _nodes(hi - lo, h, "reference domain")
        grid = Grid1D(lo, h, n, "periodic")
        off = grid.index_of(-cfg.domain)
        y0 = np.concatenate([gaussian_1d(grid.x), np.zeros(n)])
        return plain_rhs_1d(grid, stencil_coefficients(p, h)), y0, off
    if cfg.experiment in ("reflect2d", "pml-width-2d"):
        lo = -cfg.domain - cfg.ref_pad
        n = _nodes(cfg.domain + 2 * cfg.ref_pad, h, "reference domain")
        grid = Grid2D(lo, lo, h, h, n, n, "periodic", "periodic")
        off = _nodes(cfg.ref_pad, h, "reference pad")
        X, Y = np.meshgrid(grid.x, grid.y, indexing="ij")
        y0 = np.concatenate([bump_2d(X, Y).ravel(), np.zeros(n * n)])
        return plain_rhs_2d(grid, p), y0, off
    raise ConfigError(f"no free-space reference for {cfg.experiment}")


def _reflect_1d_series(cfg, p, h, pml_length):
    model, j0 = _model_1d(p, h, cfg.domain, pml_length, _sigma_value(cfg.sigma, h), cfg.aux_region)
    rhs_ref, y_ref, off = reference_solution(cfg, p, h)
    y0 = model.initial_state(gaussian_1d(model.grid.x))
    times, vals = [], []

    def observe(t, a, b):
        times.append(t)
        vals.append(float(np.max(np.abs(a[:j0 + 1] - b[off:off + j0 + 1]))))

    _lockstep(model.rhs, y0, rhs_ref, y_ref, cfg.t_final, _steps(cfg.dt_factor, h), observe)
    return ErrorSeries(times, vals, {"p": p, "h": h, "pml_length": pml_length})


def run_reflect_1d(cfg: ExperimentConfig) -> ExperimentResult:
    res = ExperimentResult(cfg.experiment)
    h = cfg.h
    for p in cfg.orders:
        long_s = _reflect_1d_series(cfg, p, h, cfg.pml_length)
        short_s = _reflect_1d_series(cfg, p, h, cfg.pml_short)
        res.series[(p, h, "long")] = long_s
        res.series[(p, h, "short")] = short_s
        # envelopes with a roundoff floor keep the ratio meaningful before arrival
        floor = 1e-15
        ratio = float(np.max(np.maximum(short_s.envelope(), floor) / np.maximum(long_s.envelope(), floor)))
        for name, val in (("max_E1D_long", long_s.max), ("max_E1D_short", short_s.max), ("short_long_ratio", ratio)):
            res.rows.append({"experiment": cfg.experiment, "p": p, "h": h, "metric": name, "value": val})
        res.check(f"p={p} long max E1D", long_s.max, cfg.threshold)
        res.check(f"p={p} short/long envelope ratio", ratio, cfg.ratio)
    return res


# ----------------------------------------------------------------------------
# 2D free-space experiments
# ----------------------------------------------------------------------------
def _reflect_2d_series(cfg, p, h):
    npml = math.ceil(cfg.pml_length / h - 1e-9)
    j0 = _nodes(cfg.domain, h, "physical domain")
    n = j0 + npml
    grid = Grid2D(-cfg.domain, -cfg.domain, h, h, n, n, "periodic", "periodic")
    sig = DampingProfile.right_constant(n, j0, _sigma_value(cfg.sigma, h))
    model = RDPML2D(grid, p, sig, sig, cfg.aux_region)
    X, Y = np.meshgrid(grid.x, grid.y, indexing="ij")
    y0 = model.pack(bump_2d(X, Y))
    rhs_ref, y_ref, off = reference_solution(cfg, p, h)
    nref = int(round(math.sqrt(y_ref.shape[0] // 2)))
    N = n * n
    times, vals = [], []

    def observe(t, a, b):
        u = a[:N].reshape(n, n)[:j0 + 1, :j0 + 1]
        ur = b[:nref * nref].reshape(nref, nref)[off:off + j0 + 1, off:off + j0 + 1]
        times.append(t)
        vals.append(float(np.max(np.abs(u - ur))))

    _lockstep(model.rhs, y0, rhs_ref, y_ref, cfg.t_final, _steps(cfg.dt_factor, h), observe)
    return ErrorSeries(times, vals, {"p": p, "h": h, "n_pml": npml}), npml


def reentry_time_2d(cfg: ExperimentConfig, h: float) -> float:
    """First time attenuated waves can re-enter the physical square through the wrap."""
    npml = math.ceil(cfg.pml_length / h - 1e-9)
    width = npml * h
    c, r = -2.0, 0.5
    right = width - (c + r)
    left = (c - r) + cfg.domain + width
    return min(right, left)


def run_reflect_2d(cfg: ExperimentConfig) -> ExperimentResult:
    res = ExperimentResult(cfg.experiment)
    h = cfg.h
    t_re = reentry_time_2d(cfg, h)
    for p in cfg.orders:
        s, npml = _reflect_2d_series(cfg, p, h)
        res.series[(p, h)] = s
        pre = s.window(0.0, t_re).max
        res.rows.append({"experiment": cfg.experiment, "p": p, "h": h, "metric": "max_E2D_before_reentry", "value": pre})
        res.rows.append({"experiment": cfg.experiment, "p": p, "h": h, "metric": "max_E2D", "value": s.max})
        res.check(f"p={p} max E2D for t<={t_re:.3g}", pre, cfg.threshold)
    return res


def run_pml_width_2d(cfg: ExperimentConfig) -> ExperimentResult:
    res = ExperimentResult(cfg.experiment)
    hs = sorted(cfg.hs, reverse=True)
    table = []
    for p in cfg.orders:
        errs = []
        for h in hs:
            s, npml = _reflect_2d_series(cfg, p, h)
            res.series[(p, h)] = s
            errs.append(s.max)
            table.append((p, h, npml, s.max))
            res.rows.append({"experiment": cfg.experiment, "p": p, "h": h, "metric": "E_h", "value": s.max})
        decreasing = all(b < a for a, b in zip(errs, errs[1:]))
        res.check(f"p={p} E_h strictly decreasing", float(decreasing), 1.0, ">=")
        res.check(f"p={p} E_h at h={hs[-1]:g}", errs[-1], cfg.threshold)
    res.tables["pml_width"] = (["p", "h", "n_pml", "E_h"], table)
    return res


# ----------------------------------------------------------------------------
# ducts
# ----------------------------------------------------------------------------
def _envelope(t):
    return 1.0 / (1.0 + math.exp(-5.0 * (t - 1.0)))


def duct_trace(kind: str, omega: float):
    """(g, g') for the inflow trace; ``kind`` selects the transverse shape."""
    shape = {"u1": lambda y: np.sin(np.pi * y / 2), "u2": lambda y: np.sin(2 * np.pi * y)}[kind]

    def g(t):
        return math.cos(omega * t) * _envelope(t)

    def dg(t):
        e = _envelope(t)
        return -omega * math.sin(omega * t) * e + math.cos(omega * t) * 5.0 * e * (1.0 - e)

    return shape, g, dg


def _duct_model(p, h1, h2, x_left, n_phys_cells, n_after, sigma, aux_region):
    """Duct with a held inflow column at index 0 and a Dirichlet node at index n_phys_cells + n_after."""
    nx = n_phys_cells + n_after
    ny = _nodes(2.0, h2, "duct height") - 1
    grid = Grid2D(x_left, h2, h1, h2, nx, ny, ("held", "dirichlet"), "dirichlet")
    return RDPML2D(grid, p, sigma, None, aux_region)


def _held_hook(model, shape, g, dg):
    nx, ny = model.grid.shape
    prof = shape(model.grid.y)
    N = nx * ny

    def hook(t, y):
        y[0:ny] = g(t) * prof
        y[N:N + ny] = dg(t) * prof

    return hook


def _duct_errors(p, cfg, h1, h2, x_left, n_phys, n_pml, sigma_pml, trace, want_model=False):
    shape, g, dg = duct_trace(trace, cfg.omega)
    nx = n_phys + n_pml
    model = _duct_model(p, h1, h2, x_left, n_phys, n_pml, sigma_pml, cfg.aux_region)
    n_ref_cells = math.ceil((cfg.domain + cfg.ref_pad) / h1 - 1e-9)
    ref = _duct_model(p, h1, h2, x_left, n_ref_cells, 0, None, cfg.aux_region)
    ny = model.grid.ny
    times, vals = [], []
    last = {}

    def observe(t, a, b):
        u = a[:nx * ny].reshape(nx, ny)[:n_phys + 1]
        ur = b[:ref.grid.nx * ny].reshape(ref.grid.nx, ny)[:n_phys + 1]
        times.append(t)
        vals.append(float(np.max(np.abs(u - ur))))
        last["u"] = a[:nx * ny].reshape(nx, ny).copy()

    dt = min(h1, h2) / cfg.dt_factor
    _lockstep(model.rhs, model.pack(np.zeros(model.grid.shape)), ref.rhs, ref.pack(np.zeros(ref.grid.shape)),
              cfg.t_final, dt, observe, _held_hook(model, shape, g, dg), _held_hook(ref, shape, g, dg))
    return ErrorSeries(times, vals, {"p": p, "trace": trace}), model, last["u"]


def zero_crossings(x: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Linearly interpolated sign changes of f(x)."""
    s = np.sign(f)
    idx = np.flatnonzero(s[:-1] * s[1:] < 0)
    x0, x1, f0, f1 = x[idx], x[idx + 1], f[idx], f[idx + 1]
    exact = x0[f0 == 0] if np.any(f0 == 0) else np.zeros(0)
    return np.sort(np.concatenate([x0 - f0 * (x1 - x0) / (f1 - f0), exact]))


def _phase_error(xc: np.ndarray, exact: np.ndarray) -> float:
    if xc.size == 0:
        return float("inf")
    d = np.abs(xc[:, None] - exact[None, :]).min(axis=1)
    return float(d.mean())


def run_waveguide(cfg: ExperimentConfig) -> ExperimentResult:
    res = ExperimentResult(cfg.experiment)
    h1, h2, om = cfg.h1, cfg.h2, cfg.omega
    n_phys = _nodes(cfg.domain, h1, "physical duct")
    n_pml = int(round(cfg.pml_length / h1))
    sig = DampingProfile.right_constant(n_phys + n_pml, n_phys, _sigma_value(cfg.sigma, h1))
    kappa = math.sqrt(om * om - math.pi ** 2 / 4)
    phase = {}
    for p in cfg.orders:
        s, model, u = _duct_errors(p, cfg, h1, h2, -cfg.domain, n_phys, n_pml, sig, "u1")
        res.series[(p, "u1")] = s
        x = model.grid.x[:n_phys + 1]
        k_mid = int(np.argmin(np.abs(model.grid.y - 1.0)))
        xc = zero_crossings(x, u[:n_phys + 1, k_mid])
        t = s.times[-1]
        # outgoing mode matching the inflow trace: cos(omega t - kappa (x + L))
        kmax = int((om * t) / math.pi) + 2
        arg = om * t - math.pi / 2 - math.pi * np.arange(-2, kmax)
        outgoing = -cfg.domain + arg / kappa
        standing = math.pi * np.arange(-int(cfg.domain * kappa / math.pi) - 2, 2) / kappa
        phase[p] = _phase_error(xc, outgoing)
        res.rows += [
            {"experiment": cfg.experiment, "p": p, "h": h1, "metric": "max_E2D", "value": s.max},
            {"experiment": cfg.experiment, "p": p, "h": h1, "metric": "phase_error_outgoing", "value": phase[p]},
            {"experiment": cfg.experiment, "p": p, "h": h1, "metric": "phase_error_standing",
             "value": _phase_error(xc, standing)},
            {"experiment": cfg.experiment, "p": p, "h": h1, "metric": "kappa", "value": kappa},
        ]
        res.check(f"p={p} max E2D", s.max, cfg.threshold)
        res.snapshots[f"waveguide_{p}_u"] = (model.grid, u)
    if 1 in phase and 2 in phase:
        ratio = phase[2] / phase[1]
        res.rows.append({"experiment": cfg.experiment, "p": "2/1", "h": h1, "metric": "phase_ratio", "value": ratio})
        res.check("phase error p=2 / p=1", ratio, cfg.ratio)
    return res


def run_evanescent(cfg: ExperimentConfig) -> ExperimentResult:
    res = ExperimentResult(cfg.experiment)
    h = cfg.h1
    n_phys = _nodes(cfg.domain, h, "physical duct")
    n_pml = _nodes(cfg.pml_length, h, "PML")
    nx = n_phys + n_pml
    profiles = {
        "sigma1": DampingProfile.right_constant(nx, n_phys, 2.0 / h),
        "sigma2": DampingProfile.two_stage(nx, n_phys, n_pml, 2.0 / h),
    }
    traces = ("u1", "u2") if cfg.trace == "both" else (cfg.trace,)
    late = {}
    p = cfg.orders[0]
    for tr in traces:
        for name, prof in profiles.items():
            s, _, _ = _duct_errors(p, cfg, h, cfg.h2, -cfg.domain, n_phys, n_pml, prof, tr)
            res.series[(p, tr, name)] = s
            late[(tr, name)] = s.window(cfg.t_final / 2).max
            res.rows.append({"experiment": cfg.experiment, "p": p, "h": h, "metric": f"max_E2D_{tr}_{name}", "value": s.max})
            res.rows.append({"experiment": cfg.experiment, "p": p, "h": h, "metric": f"late_E2D_{tr}_{name}",
                             "value": late[(tr, name)]})
    if ("u2", "sigma1") in late:
        ratio = late[("u2", "sigma1")] / max(late[("u2", "sigma2")], 1e-300)
        res.rows.append({"experiment": cfg.experiment, "p": p, "h": h, "metric": "late_ratio_u2", "value": ratio})
        res.check("u2 late E2D sigma1/sigma2", ratio, cfg.ratio, ">=")
    return res


# ----------------------------------------------------------------------------
# frequency domain
# ----------------------------------------------------------------------------
def run_helmholtz_compare(cfg: ExperimentConfig) -> ExperimentResult:
    res = ExperimentResult(cfg.experiment)
    rng = np.random.default_rng(cfg.seed)
    h = cfg.h
    for n in cfg.ns:
        j0 = (5 * n) // 8
        sig = DampingProfile.right_constant(n, j0, 2.0 / h).sigma
        for p in cfg.orders:
            for om in cfg.omegas:
                for bc in ("periodic", "dirichlet"):
                    full = assemble_full(om, n, h, p, sig, bc)
                    red = assemble_reduced(om, n, h, p, sig, bc, full=full)
                    b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
                    bf = np.zeros(full.shape[0], complex)
                    bf[:n] = b
                    vf = solve(full, bf).v_tilde
                    vr = solve(red, b).v_tilde
                    agree = float(np.max(np.abs(vf - vr)) / np.max(np.abs(vf)))
                    tag = f"n={n} p={p} omega={om:g} {bc}"
                    res.rows.append({"experiment": cfg.experiment, "p": p, "h": h, "metric": f"agreement {tag}",
                                     "value": agree})
                    res.check(f"full vs reduced {tag}", agree, cfg.threshold)
                    for which, blk in (("C1", "phi1"), ("C2", "psi1")):
                        C = full.block(blk, blk).toarray()
                        err = float(np.max(np.abs(C @ c_inverse(which, om, sig, bc) - np.eye(n))))
                        res.check(f"{which} inverse {tag}", err, 1e-12)
                    a11 = float(np.max(np.abs(red.toarray()[:j0, :j0] - full.block("v", "v").toarray()[:j0, :j0])))
                    res.rows.append({"experiment": cfg.experiment, "p": p, "h": h, "metric": f"A11 deviation {tag}",
                                     "value": a11})
                    if bc == "dirichlet":
                        res.check(f"A11 exact {tag}", a11, 0.0)
    return res


RUNNERS: dict[str, Callable[[ExperimentConfig], ExperimentResult]] = {
    "convergence1d": run_convergence_1d,
    "reflect1d": run_reflect_1d,
    "reflect2d": run_reflect_2d,
    "pml-width-2d": run_pml_width_2d,
    "waveguide": run_waveguide,
    "evanescent": run_evanescent,
    "helmholtz-compare": run_helmholtz_compare,
}


# ----------------------------------------------------------------------------
# persistence
# ----------------------------------------------------------------------------
def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) if isinstance(v, float) else v for v in r])


def _series_name(experiment, key):
    parts = [str(k) if not isinstance(k, float) else f"{k:g}" for k in key]
    return f"{experiment}_" + "_".join(parts) + ".csv"


def write_outputs(cfg: ExperimentConfig, res: ExperimentResult) -> list[str]:
    os.makedirs(cfg.outdir, exist_ok=True)
    written = []
    for key, s in res.series.items():
        path = os.path.join(cfg.outdir, _series_name(cfg.experiment, key))
        _write_csv(path, ["t", "error"], zip(s.times.tolist(), s.values.tolist()))
        written.append(path)
    for name, (header, rows) in res.tables.items():
        path = os.path.join(cfg.outdir, f"{cfg.experiment}_{name}.csv")
        _write_csv(path, header, [[float(v) if isinstance(v, (float, np.floating)) else v for v in r] for r in rows])
        written.append(path)
    if cfg.snapshot:
        for name, (grid, u) in res.snapshots.items():
            path = os.path.join(cfg.outdir, f"{name}.csv")
            with open(path, "w", newline="") as fh:
                fh.write(f"# nx={grid.nx} ny={grid.ny} x0={fmt(grid.x0)} y0={fmt(grid.y0)} "
                         f"h1={fmt(grid.h1)} h2={fmt(grid.h2)} row-major u[x][y]\n")
                w = csv.writer(fh, lineterminator="\n")
                for row in u:
                    w.writerow([fmt(float(v)) for v in row])
            written.append(path)
    summary = os.path.join(cfg.outdir, "summary.csv")
    new = not os.path.exists(summary)
    with open(summary, "a", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if new:
            w.writerow(["experiment", "p", "h", "metric", "value", "threshold", "passed"])
        for r in res.rows:
            h = r["h"]
            w.writerow([r["experiment"], r["p"], fmt(float(h)) if isinstance(h, float) else h, r["metric"],
                        fmt(float(r["value"])), "", ""])
        for c in res.checks:
            w.writerow([cfg.experiment, "", "", f"check: {c.name}", fmt(c.value), f"{c.comparison} {fmt(c.threshold)}",
                        int(c.passed)])
    written.append(summary)
    return written


def run(cfg: ExperimentConfig, write: bool = True) -> ExperimentResult:
    res = RUNNERS[cfg.experiment](cfg)
    if write:
        write_outputs(cfg, res)
    return res
