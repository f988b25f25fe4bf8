import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from oracles import bessel_j_series, euler_gamma_by_euler_maclaurin, trapezoid_log_moment
from shiftconv import special
from shiftconv.config import CACHE_ENV_VAR, Config, load_config, parse_config_text
from shiftconv.transforms import _k_imag_order, _ysum_imag_order, log_moments, mellin
from shiftconv.weights import SmoothWeight, bump_eq1_on_unit2, plateau, simple_bump, smoothstep

# -- log gamma ------------------------------------------------------------------


def test_log_gamma_known_values():
    assert special.log_gamma_complex(1) == 0
    assert special.log_gamma_complex(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-15)
    assert special.log_gamma_complex(5) == pytest.approx(math.log(24), rel=1e-15)


@pytest.mark.parametrize("z", [0, -1, -7, -20])
def test_log_gamma_poles(z):
    with pytest.raises(special.PoleError):
        special.log_gamma_complex(z)


@given(st.floats(-20, 20), st.floats(-200, 200))
@settings(max_examples=200)
def test_log_gamma_against_mpmath(re, im):
    z = complex(re, im)
    if re < 0.5 and abs(complex(re - round(re), im)) < 1e-3:
        return  # log Gamma is ill-conditioned next to its poles
    ref = complex(mpmath.loggamma(mpmath.mpc(re, im)))
    got = special.log_gamma_complex(z)
    assert abs(got - ref) <= 1e-12 * max(1.0, abs(ref))


def test_log_gamma_array_marks_poles_infinite():
    out = special.log_gamma_array(np.array([1.0, 0.0, -3.0, 2.5 + 1j]))
    assert np.isinf(out[1].real) and np.isinf(out[2].real)
    assert out[0] == 0


# -- Bessel J -------------------------------------------------------------------


def test_bessel_j_examples():
    assert special.bessel_j(11, 0.0) == 0.0
    assert special.bessel_j(0.5, 2.0) == pytest.approx(math.sqrt(2 / (math.pi * 2)) * math.sin(2), abs=1e-15)
    assert special.bessel_j(0, 1.0) == pytest.approx(bessel_j_series(0, 1.0, terms=40), abs=1e-15)


@pytest.mark.parametrize("nu", [0, 1, 5.5, 11, 23])
@pytest.mark.parametrize("x", [0.3, 2.0, 9.0, 17.5, 30.0])
def test_bessel_j_power_series(nu, x):
    assert special.bessel_j(nu, x) == pytest.approx(bessel_j_series(nu, x), abs=1e-12)


@pytest.mark.parametrize("nu", [0, 11, 40])
def test_bessel_j_large_argument(nu):
    xs = np.array([50.0, 333.3, 1234.5, 5000.0, 9999.0])
    got = special.bessel_j(nu, xs)
    ref = [float(mpmath.besselj(nu, x)) for x in xs]
    assert np.allclose(got, ref, atol=1e-10, rtol=0)


def test_bessel_j_rejects_negative():
    with pytest.raises(ValueError):
        special.bessel_j(-1, 1.0)
    with pytest.raises(ValueError):
        special.bessel_j(1, -1.0)


# -- imaginary-order kernels ----------------------------------------------------


@pytest.mark.parametrize("nu", [0.0, 0.7, 2.0, 6.0])
def test_k_imaginary_order_against_mpmath(nu):
    z = np.array([0.05, 0.5, 3.0, 12.0, 40.0])
    got = _k_imag_order(nu, z)
    ref = [float(mpmath.re(mpmath.besselk(1j * nu, x))) for x in z]
    assert np.allclose(got, ref, atol=1e-12, rtol=1e-10)


@pytest.mark.parametrize("nu", [0.0, 0.7, 2.0, 6.0])
def test_y_pair_imaginary_order_against_mpmath(nu):
    z = np.array([0.5, 3.0, 12.0, 40.0])
    got = _ysum_imag_order(nu, z)
    ref = [float(mpmath.re(mpmath.bessely(1j * nu, x) + mpmath.bessely(-1j * nu, x))) for x in z]
    scale = max(1.0, math.cosh(math.pi * nu))
    assert np.allclose(got, ref, atol=1e-11 * scale)


# -- constants --------------------------------------------------------------------


def test_constants_against_mpmath():
    g, g1 = special.constants()
    assert g == pytest.approx(float(mpmath.euler), abs=1e-15)
    assert g1 == pytest.approx(float(mpmath.stieltjes(1)), abs=1e-14)


def test_euler_gamma_depth_independent():
    assert special.euler_gamma(40, 12) == pytest.approx(special.euler_gamma(90, 6), abs=1e-13)
    assert special.euler_gamma(40) == pytest.approx(euler_gamma_by_euler_maclaurin(60, 10), abs=1e-13)


def test_stieltjes_depth_independent():
    assert special.stieltjes_gamma1(40, 12) == pytest.approx(special.stieltjes_gamma1(100, 6), abs=1e-13)


def test_laurent_expansion_near_one():
    g, g1 = special.constants()
    s = 1.01
    lhs = float(mpmath.zeta(s)) - 1 / (s - 1)
    assert lhs == pytest.approx(g - g1 * (s - 1), abs=1e-6)


def test_bernoulli_numbers():
    from fractions import Fraction

    assert [special.bernoulli(n) for n in (0, 1, 2, 4, 12)] == [
        Fraction(1), Fraction(-1, 2), Fraction(1, 6), Fraction(-1, 30), Fraction(-691, 2730)]


# -- weights ----------------------------------------------------------------------


def test_smoothstep_limits():
    assert smoothstep(0.0) == 0.0 and smoothstep(1.0) == 1.0
    assert smoothstep(0.5) == pytest.approx(0.5)


@pytest.mark.parametrize("w", [simple_bump(), bump_eq1_on_unit2(), plateau(4.0), plateau(30.0)])
def test_weights_vanish_outside_support(w):
    lo, hi = w.unit_support
    outside = np.concatenate([np.linspace(-3, lo, 50), np.linspace(hi, 9, 50)])
    assert np.all(w.unit(outside) == 0)
    assert np.all(w.unit(np.linspace(lo, hi, 101)[1:-1]) > 0)


def test_plateau_and_eq1_regions():
    assert np.all(bump_eq1_on_unit2().unit(np.linspace(1, 2, 41)) == 1)
    d = 8.0
    assert np.all(plateau(d).unit(np.linspace(1 + 1 / d, 2 - 1 / d, 41)) == 1)


def _max_derivative(w, j, n=400_001):
    lo, hi = w.unit_support
    u = np.linspace(lo - 0.01, hi + 0.01, n)
    v = w.unit(u)
    for _ in range(j):
        v = np.gradient(v, u)
    return np.abs(v).max()


@pytest.mark.parametrize("j", [1, 2, 3])
def test_plateau_derivatives_scale_like_delta_power(j):
    ratios = [_max_derivative(plateau(d), j) / d**j for d in (4.0, 8.0, 16.0)]
    assert max(ratios) / min(ratios) < 1.3


@pytest.mark.parametrize("j,bound", [(1, 4.01), (2, 40.0), (3, 1100.0)])
def test_fixed_bump_derivatives_bounded(j, bound):
    # measured maxima: 4, 39.4, ~950 (the third difference is still grid sensitive)
    assert _max_derivative(simple_bump(), j) < bound
    assert _max_derivative(bump_eq1_on_unit2(), j) < bound


def test_weight_scale_and_twist():
    w = simple_bump(100.0, twist=0.01)
    assert w(150.0) == pytest.approx(simple_bump().unit(1.5) * np.exp(2j * math.pi * 1.5))
    assert w.support == (100.0, 200.0)
    assert w.at_scale(5.0).scale == 5.0
    assert w.scaled_by(3.0)(150.0) == pytest.approx(3 * w(150.0))


def test_weight_validation():
    with pytest.raises(ValueError):
        SmoothWeight("triangle")
    with pytest.raises(ValueError):
        plateau(1.0)
    with pytest.raises(ValueError):
        simple_bump(scale=0.0)


# -- Mellin transforms --------------------------------------------------------------


@pytest.mark.parametrize("make", [simple_bump, bump_eq1_on_unit2, lambda: plateau(6.0)])
def test_mellin_at_one_is_total_mass(make):
    w = make()
    mass = mellin(w, 1.0).real
    unit_mass = w.scaled_by(1 / mass)
    assert mellin(unit_mass, 1.0) == pytest.approx(1.0, abs=1e-13)
    lo, hi = w.unit_support
    assert mass == pytest.approx(quad(lambda u: float(w.unit(u)), lo, hi, epsabs=1e-14, limit=200)[0], rel=1e-11)


@given(st.floats(0.5, 1e5), st.floats(-2, 2), st.floats(-30, 30))
@settings(max_examples=40, deadline=None)
def test_mellin_scaling_law(Y, re, im):
    s = complex(re, im)
    w = simple_bump()
    assert mellin(w.at_scale(Y), s) == pytest.approx(Y**s * mellin(w, s), rel=1e-10)


def test_mellin_against_direct_quadrature_at_scale():
    Y = 37.0
    w = plateau(5.0, Y)
    for s in (0.3, 1.0, 2.2):
        direct = quad(lambda u: float(w(u)) * u ** (s - 1), Y, 2 * Y, epsabs=0, epsrel=1e-13, limit=400)[0]
        assert mellin(w, s).real == pytest.approx(direct, rel=1e-10)


@pytest.mark.parametrize("w", [simple_bump(), bump_eq1_on_unit2(), plateau(8.0)])
def test_log_moments_against_trapezoid(w):
    lo, hi = w.unit_support
    got = log_moments(w)
    for j in range(3):
        assert got[j] == pytest.approx(trapezoid_log_moment(w.unit, lo, hi, j), abs=1e-9)


def test_log_moments_at_scale():
    Y = 2000.0
    w = simple_bump(Y)
    lo, hi = w.support
    got = log_moments(w)
    for j in range(3):
        ref = trapezoid_log_moment(w, lo, hi, j, n=400_000)
        assert got[j] == pytest.approx(ref, rel=1e-9)
    assert got[0] == pytest.approx(Y * log_moments(simple_bump())[0], rel=1e-13)


# -- config --------------------------------------------------------------------------


def test_config_defaults_positive():
    cfg = Config()
    assert cfg.memory_budget == 200_000_000 and cfg.cutoff_eps == 0.1 and cfg.safety_factor == 10


def test_config_file_and_env(tmp_path):
    path = tmp_path / "cfg.txt"
    path.write_text("# comment\nthreads = 3\nquad_tol=1e-9\nmaass_kernels = yes\n")
    cfg = load_config(path, env={CACHE_ENV_VAR: str(tmp_path / "c")})
    assert (cfg.threads, cfg.quad_tol, cfg.maass_kernels) == (3, 1e-9, True)
    assert cfg.cache_dir == tmp_path / "c"
    assert cfg.with_overrides(threads=None).threads == 3


def test_config_rejects_bad_values():
    with pytest.raises(ValueError):
        parse_config_text("threads 3")
    with pytest.raises(KeyError):
        Config().with_overrides(colour="red")
    with pytest.raises(ValueError):
        Config(threads=0)
