import math
import warnings
from fractions import Fraction as Fr

import numpy as np
import pytest
from numpy.polynomial import chebyshev as C

from rdpml import (DampingProfile, char_poly, char_poly_coefficients, decay_factor, discrete_wavenumbers,
                   dispersion_map, optimal_sigma, stencil_coefficients)
from rdpml.dispersion import (SENTINEL, DegenerateModeWarning, DegeneratePolynomialError, SingularEvaluationError,
                              optimal_sigma_exact)

# h^2 P_p(z; lam) coefficients b_0..b_p at lam = 0, as printed for the standard stencils
PRINTED = {
    1: (Fr(-2), Fr(1)),
    2: (Fr(-7, 3), Fr(4, 3), Fr(-1, 12)),
    3: (Fr(-109, 45), Fr(22, 15), Fr(-3, 20), Fr(1, 90)),
    4: (Fr(-772, 315), Fr(32, 21), Fr(-27, 140), Fr(8, 315), Fr(-1, 560)),
}

# discrete wavenumbers for omega = 5, h = 0.1, as printed (4 decimals)
PRINTED_XI = {
    1: [5.0536],
    2: [-26.5144j, 5.0017],
    3: [9.8894 - 23.6000j, 9.8894 + 23.6000j, 5.0000],
    4: [-23.5129j, 14.5883 - 21.1132j, 14.5883 + 21.1132j, 5.0000],
}


@pytest.mark.parametrize("p", [1, 2, 3, 4])
def test_printed_polynomials_exact(p):
    b = char_poly_coefficients(list(stencil_coefficients(p).rational), Fr(0))
    assert tuple(b) == PRINTED[p]


@pytest.mark.parametrize("p", [1, 2, 3, 4, 5])
def test_coefficients_match_chebyshev_route(p):
    # sum_r a_r (y^r + y^-r) = a_0 + sum 2 a_r T_r(z/2): an independent expansion
    a = [float(c) for c in stencil_coefficients(p).rational]
    cheb = np.array([a[0]] + [2 * ar for ar in a[1:]])
    power = C.cheb2poly(cheb)  # in w = z/2
    expected = power / 2.0 ** np.arange(p + 1)
    got = np.array([float(c) for c in char_poly_coefficients([Fr(x) for x in stencil_coefficients(p).rational], 0)])
    assert np.allclose(got, expected, rtol=0, atol=1e-14)


def test_lambda_only_enters_constant_term():
    a = list(stencil_coefficients(3).rational)
    b0 = char_poly_coefficients(a, Fr(0))
    b1 = char_poly_coefficients(a, Fr(7, 3))
    assert b1[0] - b0[0] == Fr(7, 3)
    assert b1[1:] == b0[1:]


@pytest.mark.parametrize("p", [1, 2, 3, 4])
def test_printed_wavenumbers(p):
    modes = discrete_wavenumbers(char_poly(p, stencil_coefficients(p, 0.1), 25.0), 0.1)
    got = list(modes.wavenumbers)
    for want in PRINTED_XI[p]:
        d = min(abs(g - want) for g in got)
        # the order-6 real root is 5.0000671; the printed 5.0000 is a truncation
        assert d <= 1e-4, (p, want, got)


def test_order6_real_root_asymptotics():
    # leading truncation term of the order-6 scheme: xi ~ omega + omega^7 h^6 / 1120
    h, om = 0.1, 5.0
    modes = discrete_wavenumbers(char_poly(3, stencil_coefficients(3, h), om ** 2), h)
    real = [x.real for x in modes.wavenumbers if abs(x.imag) < 1e-9][0]
    lead = om ** 7 * h ** 6 / 1120
    assert (real - om) / lead == pytest.approx(1.0, abs=0.1)


@pytest.mark.parametrize("p", [1, 2, 3, 4])
def test_roots_satisfy_relation_and_strip(p):
    h = 0.1
    poly = char_poly(p, stencil_coefficients(p, h), 25.0)
    modes = discrete_wavenumbers(poly, h)
    assert len(modes.wavenumbers) == p
    for xi in modes.wavenumbers:
        assert -1e-12 <= xi.real <= math.pi / h + 1e-12
        assert abs(poly(2 * np.cos(xi * h))) < 1e-8 * max(1.0, abs(poly.coeffs[0]))


def test_second_order_closed_form():
    h, om = 0.1, 5.0
    xi = discrete_wavenumbers(char_poly(1, stencil_coefficients(1, h), om ** 2), h).wavenumbers[0]
    assert xi.real == pytest.approx(math.acos(1 - om ** 2 * h ** 2 / 2) / h, rel=1e-14)


def test_degenerate_root_warns():
    # lam = 0 gives z = 2 for p = 1
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        discrete_wavenumbers(char_poly(1, stencil_coefficients(1, 0.1), 0.0), 0.1)
    assert any(issubclass(x.category, DegenerateModeWarning) for x in w)


def test_degenerate_polynomial_rejected():
    from rdpml.dispersion import CharPoly
    with pytest.raises(DegeneratePolynomialError):
        discrete_wavenumbers(CharPoly(2, 0j, (1 + 0j, 1 + 0j, 0j)), 0.1)


def test_decay_factor_values():
    assert decay_factor(0.0, 3.0, 5.0, 0.1) == pytest.approx(1.0)
    # at xi = pi/h on the real axis the factor has unit modulus
    assert abs(decay_factor(20.0, math.pi / 0.1, 5.0, 0.1)) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        decay_factor(1.0, 1.0, 0.0, 0.1)


def test_decay_factor_singular_denominator():
    # 2 + i s (1 - e^{i xi h}) = 0 for a suitable complex xi
    h, om, sig = 0.1, 1.0, 1.0
    s = sig / om
    e = 1 - 2j / s
    xi = np.log(e) / (1j * h)
    with pytest.raises(SingularEvaluationError):
        decay_factor(sig, xi, om, h)


def test_decay_factor_below_one_on_admissible_set():
    rng = np.random.default_rng(4)
    h, n = 0.1, 4000
    sig = rng.uniform(1e-2, 200, n)
    om = rng.uniform(0.1, 60, n)
    xi = rng.uniform(0, math.pi / h, n) - 1j * rng.uniform(0, 40, n)
    assert np.all(np.abs(decay_factor(sig, xi, om, h)) < 1)
    edge = np.where(rng.random(n) < 0.5, 0.0, math.pi / h) - 1j * rng.uniform(1e-3, 40, n)
    assert np.all(np.abs(decay_factor(sig, edge, om, h)) < 1)
    # negative frequencies: mirrored strip
    assert np.all(np.abs(decay_factor(sig, -np.conj(xi), -om, h)) < 1)


def test_optimal_sigma():
    assert optimal_sigma(0.1) == 20.0
    with pytest.raises(ValueError):
        optimal_sigma(0.0)
    # sigma* approaches 2/h as omega h -> 0 and minimises |rho| at xi = omega
    h, om = 0.01, 1.0
    assert optimal_sigma_exact(om, h) == pytest.approx(2 / h, rel=1e-4)
    sig = np.linspace(1, 1000, 20001)
    best = sig[np.argmin(np.abs(decay_factor(sig, om, om, h)))]
    assert best == pytest.approx(optimal_sigma_exact(om, h), rel=1e-3)


def test_dispersion_map_singularities_near_roots():
    h = 0.1
    re, im, field = dispersion_map(2, h, 25.0, (0, 10), (-1, 1), (201, 41))
    assert field.shape == (41, 201)
    i0 = np.argmin(np.abs(im))
    row = np.where(field[i0] == SENTINEL, np.inf, field[i0])
    window = (re > 3) & (re < 7)
    j = np.flatnonzero(window)[np.argmax(row[window])]
    assert re[j] == pytest.approx(5.0017, abs=0.06)
    with pytest.raises(ValueError):
        dispersion_map(2, h, 25.0, (0, 1), (0, 1), 1)


def test_profiles():
    n = 40
    assert DampingProfile.right_constant(n, 30, 5.0).support == (30, 40)
    assert DampingProfile.left_constant(n, 10, 5.0).support == (0, 10)
    two = DampingProfile.two_sided(n, 5, 35, 1.0).sigma
    assert two[:5].all() and not two[5:35].any() and two[35:].all()
    st = DampingProfile.two_stage(n, 10, 25, 3.0).sigma
    assert np.flatnonzero(st).tolist() == list(range(10, 10 + 13 + 1))
    assert DampingProfile.zero(n).support is None
    with pytest.raises(ValueError):
        DampingProfile.custom([1.0, -1.0])
    with pytest.raises(ValueError):
        DampingProfile.custom([1.0, np.inf])
