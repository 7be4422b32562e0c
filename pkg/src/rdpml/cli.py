"""Command-line entry point ``rdpml``.

    rdpml <experiment> --config FILE [--key value ...]
    rdpml stencil --p P [--h H]
    rdpml dispersion roots|map|rho ...
    rdpml helmholtz solve|pattern ...

Experiment runs exit with status 0 only if every configured threshold passes.
"""
from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from . import experiments as ex
from .dispersion import DampingProfile, char_poly, decay_factor, discrete_wavenumbers, dispersion_map
from .helmholtz import assemble_full, assemble_reduced, point_source, solve, sparsity_report
from .stencil import stencil_coefficients


def _overrides(rest: list[str]) -> dict:
    out = {}
    i = 0
    while i < len(rest):
        tok = rest[i]
        if not tok.startswith("--"):
            raise ex.ConfigError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, val = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(rest):
                raise ex.ConfigError(f"missing value for --{key}")
            val = rest[i + 1]
            i += 2
        out[key.replace("-", "_")] = val
    return out


def _run_experiment(name: str, argv: list[str]) -> int:
    ap = argparse.ArgumentParser(prog=f"rdpml {name}", allow_abbrev=False)
    ap.add_argument("--config", help="flat key = value file")
    ap.add_argument("--dry-run", action="store_true", help="print the resolved configuration and exit")
    args, rest = ap.parse_known_args(argv)
    text = f"experiment = {name}\n"
    if args.config:
        with open(args.config) as fh:
            text = fh.read()
    overrides = _overrides(rest)
    cfg = ex.parse_config(text, overrides)
    if cfg.experiment != name:
        raise ex.ConfigError(f"config names experiment {cfg.experiment!r}, command asked for {name!r}")
    if args.dry_run:
        sys.stdout.write(ex.emit_config(cfg))
        return 0
    res = ex.run(cfg)
    for c in res.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.value:.6e} {c.comparison} {c.threshold:.6e}")
    print(f"outputs in {cfg.outdir}")
    return 0 if res.passed else 1


def _stencil(argv):
    ap = argparse.ArgumentParser(prog="rdpml stencil")
    ap.add_argument("--p", type=int, required=True)
    ap.add_argument("--h", type=float, default=1.0)
    a = ap.parse_args(argv)
    s = stencil_coefficients(a.p, a.h)
    for r, (q, f) in enumerate(zip(s.rational, s.scaled)):
        print(f"a_{r} h^2 = {q}    a_{r} = {ex.fmt(float(f))}")
    return 0


def _dispersion(argv):
    ap = argparse.ArgumentParser(prog="rdpml dispersion")
    sub = ap.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("roots", help="discrete wavenumbers for L_p + omega^2")
    r.add_argument("--p", type=int, required=True)
    r.add_argument("--h", type=float, required=True)
    r.add_argument("--omega", type=float, required=True)
    m = sub.add_parser("map", help="|log|P_p|| over a rectangle of complex xi, as CSV")
    m.add_argument("--p", type=int, required=True)
    m.add_argument("--h", type=float, required=True)
    m.add_argument("--omega", type=float, required=True)
    m.add_argument("--re", type=float, nargs=2, default=None)
    m.add_argument("--im", type=float, nargs=2, default=(-5.0, 5.0))
    m.add_argument("--resolution", type=int, default=101)
    m.add_argument("--out", default="-")
    q = sub.add_parser("rho", help="decay factor rho(sigma, xi, omega)")
    q.add_argument("--sigma", type=float, required=True)
    q.add_argument("--xi", type=complex, required=True)
    q.add_argument("--omega", type=float, required=True)
    q.add_argument("--h", type=float, required=True)
    a = ap.parse_args(argv)
    if a.cmd == "roots":
        modes = discrete_wavenumbers(char_poly(a.p, stencil_coefficients(a.p, a.h), a.omega ** 2), a.h)
        print("r,z_re,z_im,xi_re,xi_im")
        for i, (z, xi) in enumerate(zip(modes.roots, modes.wavenumbers), 1):
            print(",".join([str(i)] + [ex.fmt(v) for v in (z.real, z.imag, xi.real, xi.imag)]))
    elif a.cmd == "map":
        re_rng = a.re if a.re is not None else (0.0, np.pi / a.h)
        re, im, field = dispersion_map(a.p, a.h, a.omega ** 2, re_rng, a.im, a.resolution)
        fh = sys.stdout if a.out == "-" else open(a.out, "w", newline="")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["xi_re", "xi_im", "value"])
        for i, yi in enumerate(im):
            for j, xr in enumerate(re):
                w.writerow([ex.fmt(xr), ex.fmt(yi), ex.fmt(field[i, j])])
        if fh is not sys.stdout:
            fh.close()
    else:
        rho = complex(decay_factor(a.sigma, a.xi, a.omega, a.h))
        print(f"rho = {ex.fmt(rho.real)} + {ex.fmt(rho.imag)}i    |rho| = {ex.fmt(abs(rho))}")
    return 0


def _helmholtz(argv):
    ap = argparse.ArgumentParser(prog="rdpml helmholtz")
    ap.add_argument("cmd", choices=("solve", "pattern"))
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--h", type=float, default=0.1)
    ap.add_argument("--p", type=int, default=1)
    ap.add_argument("--omega", type=float, default=5.0)
    ap.add_argument("--pml-start", type=int, default=None, help="first damped node (default 5n/8)")
    ap.add_argument("--sigma", type=float, default=None, help="damping value (default 2/h)")
    ap.add_argument("--bc", choices=("periodic", "dirichlet"), default="periodic")
    ap.add_argument("--system", choices=("full", "reduced"), default="full")
    ap.add_argument("--source", type=int, default=None, help="point-source node (default n/4)")
    ap.add_argument("--out", default="-")
    a = ap.parse_args(argv)
    start = a.pml_start if a.pml_start is not None else (5 * a.n) // 8
    sig = DampingProfile.right_constant(a.n, start, a.sigma if a.sigma is not None else 2.0 / a.h).sigma
    asm = assemble_full if a.system == "full" else assemble_reduced
    system = asm(a.omega, a.n, a.h, a.p, sig, a.bc)
    fh = sys.stdout if a.out == "-" else open(a.out, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    if a.cmd == "solve":
        src = a.source if a.source is not None else a.n // 4
        sol = solve(system, point_source(a.n, a.p, src, a.system))
        w.writerow(["j", "re", "im"])
        for j, v in enumerate(sol.v_tilde):
            w.writerow([j, ex.fmt(v.real), ex.fmt(v.imag)])
        print(f"residual {sol.residual:.3e}", file=sys.stderr)
    else:
        rep = sparsity_report(system)
        w.writerow(["row_block", "col_block", "nnz", "lower_bandwidth", "upper_bandwidth", "density"])
        for (rn, cn), d in rep["blocks"].items():
            w.writerow([rn, cn, d["nnz"], d["lower_bandwidth"], d["upper_bandwidth"], ex.fmt(d["density"])])
    if fh is not sys.stdout:
        fh.close()
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    tools = {"stencil": _stencil, "dispersion": _dispersion, "helmholtz": _helmholtz}
    if not argv or argv[0] in ("-h", "--help"):
        print(__doc__.strip())
        print("experiments: " + ", ".join(ex.EXPERIMENTS))
        return 0
    cmd, rest = argv[0], argv[1:]
    try:
        if cmd in tools:
            return tools[cmd](rest)
        if cmd in ex.EXPERIMENTS:
            return _run_experiment(cmd, rest)
    except ex.ConfigError as exc:
        print(f"rdpml: {exc}", file=sys.stderr)
        return 2
    print(f"rdpml: unknown command {cmd!r}", file=sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())
