import math

import numpy as np
import pytest
from lattice import closure_mode, faces, mode, residual

from rdpml import (DampingProfile, Grid1D, InvalidConfigurationError, RDPML1D, State1D, char_poly,
                   discrete_wavenumbers, plain_rhs_1d, rhs_1d, rk_final, stencil_coefficients)
from rdpml.rdpml1d import periodic_closure_1d


def _wavenumbers(p, h, omega):
    return discrete_wavenumbers(char_poly(p, stencil_coefficients(p, h), omega ** 2), h).wavenumbers


@pytest.mark.parametrize("p", [1, 2, 3, 4])
def test_interior_equations_exact_on_lattice_modes(p):
    rng = np.random.default_rng(p)
    omega, h, n = 5.0, 0.1, 40
    sig = np.zeros(n)
    sig[10:] = rng.uniform(0.5, 20, n - 10)
    model = RDPML1D(Grid1D(0.0, h, n, "periodic"), p, sig)
    for xi in _wavenumbers(p, h, omega):
        v, phi, psi = faces(mode(xi, sig, omega, h), sig, omega, h, p)
        (du, dv, dphi, dpsi), scale = residual(model, v, phi, psi, omega)
        # rows away from the periodic seam, where the mode is not periodic
        sl = slice(2 * p, n - 2 * p)
        err = max(np.abs(x[..., sl]).max() for x in (du, dv, dphi, dpsi)) / scale
        assert err < 1e-10, (p, xi, err)


@pytest.mark.parametrize("p,kind,side", [(p, k, s) for p in (1, 2) for k in ("dirichlet", "neumann")
                                         for s in ("hi", "lo")])
def test_closures_exact_on_lattice_modes(p, kind, side):
    rng = np.random.default_rng(10 * p)
    omega, h, n = 5.0, 0.1, 30
    sig = np.zeros(n)
    if side == "hi":
        sig[12:] = rng.uniform(0.5, 20, n - 12)
        bc = ("dirichlet", kind)
        far = slice(2 * p, n)
    else:
        sig[:n - 12] = rng.uniform(0.5, 20, n - 12)
        bc = (kind, "dirichlet")
        far = slice(0, n - 2 * p)
    model = RDPML1D(Grid1D(0.0, h, n, bc), p, sig)
    fam = model.family
    for xi in _wavenumbers(p, h, omega):
        v, phi, psi = faces(closure_mode(xi, sig, omega, h, kind, side), sig, omega, h, p)
        (du, dv, dphi, dpsi), scale = residual(model, v, phi, psi, omega)
        dphi[:, fam.frozen_phi] = 0.0
        dpsi[:, fam.frozen_psi] = 0.0
        err = max(np.abs(x[..., far]).max() for x in (du, dv, dphi, dpsi)) / scale
        assert err < 1e-10, (xi, err)


@pytest.mark.parametrize("p", [1, 2, 3, 4])
@pytest.mark.parametrize("region", ["full", "support"])
def test_zero_damping_is_bitwise_plain(p, region):
    grid = Grid1D(-1.0, 0.05, 40, "periodic")
    u0 = np.exp(-30 * grid.x ** 2)
    model = RDPML1D(grid, p, None, region)
    a = rk_final(model.rhs, model.initial_state(u0), 0.0, 0.5, 0.01)
    b = rk_final(plain_rhs_1d(grid, stencil_coefficients(p, 0.05)), np.concatenate([u0, 0 * u0]), 0.0, 0.5, 0.01)
    assert np.array_equal(a[:80], b)
    if region == "support":
        assert a.shape == b.shape  # no auxiliaries stored without damping


def test_aux_region_choices_agree():
    n, h, p = 60, 0.05, 3
    grid = Grid1D(0.0, h, n, "periodic")
    sig = DampingProfile.right_constant(n, 40, 2 / h)
    full, sup = RDPML1D(grid, p, sig, "full"), RDPML1D(grid, p, sig, "support")
    assert sup.size < full.size
    u0 = np.exp(-40 * (grid.x - 1.0) ** 2)
    yf = rk_final(full.rhs, full.initial_state(u0), 0.0, 1.0, h / 8)
    ys = rk_final(sup.rhs, sup.initial_state(u0), 0.0, 1.0, h / 8)
    sf, ss = full.unpack(yf), sup.unpack(ys)
    assert np.allclose(sf.u, ss.u, rtol=0, atol=1e-14)
    # away from the layer the auxiliaries evolve but never feed back
    rows = sup.aux_rows
    assert np.allclose(sf.phi[:, rows], ss.phi[:, rows], rtol=0, atol=1e-12)
    assert np.allclose(sf.psi[:, rows], ss.psi[:, rows], rtol=0, atol=1e-12)


def test_pack_unpack_roundtrip():
    rng = np.random.default_rng(0)
    n, p = 20, 2
    model = RDPML1D(Grid1D(0.0, 0.1, n, "periodic"), p, DampingProfile.right_constant(n, 12, 5.0), "full")
    u, v, phi, psi = rng.standard_normal(n), rng.standard_normal(n), rng.standard_normal((p, n)), rng.standard_normal((p, n))
    st = model.unpack(model.pack(u, v, phi, psi))
    for a, b in ((st.u, u), (st.v, v), (st.phi, phi), (st.psi, psi)):
        assert np.array_equal(a, b)


def test_functional_form_matches_model():
    rng = np.random.default_rng(1)
    n, p, h = 24, 2, 0.1
    grid = Grid1D(0.0, h, n, "periodic")
    sig = DampingProfile.right_constant(n, 16, 12.0)
    st = State1D(*(rng.standard_normal(n) for _ in range(2)), rng.standard_normal((p, n)), rng.standard_normal((p, n)))
    d = rhs_1d(st, grid, sig, stencil_coefficients(p, h))
    model = RDPML1D(grid, p, sig)
    ref = model.unpack(model.rhs(0.0, model.pack(st.u, st.v, st.phi, st.psi)))
    assert np.array_equal(d.v, ref.v) and np.array_equal(d.phi, ref.phi)
    ghosts = periodic_closure_1d(st, p)
    assert ghosts["u"].shape == (n + 2 * p,) and ghosts["phi"].shape == (p, n + 2 * p)


def test_complex_state_supported():
    n, p = 20, 1
    model = RDPML1D(Grid1D(0.0, 0.1, n, "periodic"), p, DampingProfile.right_constant(n, 12, 5.0))
    y = model.pack(np.exp(1j * np.arange(n)))
    assert np.iscomplexobj(model.rhs(0.0, y))


def test_invalid_configurations():
    grid = Grid1D(0.0, 0.1, 20, "periodic")
    with pytest.raises(InvalidConfigurationError):
        RDPML1D(grid, 2, np.zeros(19))
    with pytest.raises(InvalidConfigurationError):
        RDPML1D(grid, 2, -np.ones(20))
    with pytest.raises(InvalidConfigurationError):
        RDPML1D(Grid1D(0.0, 0.1, 4, "periodic"), 2)
    with pytest.raises(InvalidConfigurationError):
        RDPML1D(grid, 2, stencil=stencil_coefficients(3, 0.1))
    with pytest.raises(InvalidConfigurationError):
        grid.index_of(0.05)
    with pytest.raises(ValueError):
        Grid1D(0.0, 0.0, 10)


def test_pulse_leaves_layer_without_reflection():
    # a right-going pulse on a periodic ring crosses into the layer and is damped
    n, h, p = 200, 0.05, 2
    grid = Grid1D(0.0, h, n, "periodic")
    sig = DampingProfile.right_constant(n, 120, 2 / math.sqrt(h))
    x = grid.x
    g = np.exp(-40 * (x - 3.0) ** 2)
    dg = 80 * (x - 3.0) * g
    model = RDPML1D(grid, p, sig, "support")
    y = rk_final(model.rhs, model.pack(g, dg), 0.0, 6.0, h / 8)
    assert np.max(np.abs(y[:120])) < 1e-3 * np.max(np.abs(g))
