import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftconv.errors import ContourError, UnsupportedKernelError
from shiftconv.transforms import (
    TRIVIAL_GL3,
    ContourProfile,
    ContourTable,
    SpectralParams,
    dual_cutoff,
    kernel_extent,
    mellin_line,
    omega_k,
    omega_pm,
    phi_k,
    phi_pm,
    pm_table,
    psi_pm,
    resolve_sigma,
)
from shiftconv.transforms import mellin as mellin_direct
from shiftconv.weights import plateau, simple_bump

W2000 = simple_bump(2000.0)
SIGMA_GRID = {0: (-0.59, -0.5, -0.2, 0.1, 0.5), 1: (-2.5, -2.0, -1.5, -1.0, -0.5)}


def _rel(a, b):
    return abs(a - b) / abs(b)


# -- parameters and profiles ----------------------------------------------------


def test_spectral_params_validation():
    assert np.allclose(SpectralParams.from_nu(1 / 3, 1 / 3).mu, 0)
    assert sum(SpectralParams.from_nu(0.3, 0.4).mu) == pytest.approx(0)
    with pytest.raises(ValueError):
        SpectralParams("gl3", (0.1, 0.1, 0.1))
    with pytest.raises(ValueError):
        SpectralParams.gl3(0.45, -0.45)
    with pytest.raises(ValueError):
        SpectralParams.holomorphic(11)
    with pytest.raises(ValueError):
        SpectralParams("gl4")


def test_contour_outside_strip_rejected():
    with pytest.raises(ContourError):
        omega_k(0, 0.1, W2000, ContourProfile(sigma=-1.0))
    with pytest.raises(ContourError):
        omega_k(1, 0.1, W2000, ContourProfile(sigma=-3.2))
    mu = (0.3, -0.15, -0.15)
    with pytest.raises(ContourError):
        resolve_sigma(0, mu, ContourProfile(sigma=-0.9))
    assert resolve_sigma(0, mu, ContourProfile(sigma=-0.8)) == -0.8


def test_profile_values_positive():
    with pytest.raises(ValueError):
        ContourProfile(truncation=0)


# -- Mellin on a vertical line ----------------------------------------------------


@pytest.mark.parametrize("w", [simple_bump(), plateau(6.0), simple_bump(1.0, twist=0.7)])
def test_mellin_line_matches_adaptive_quadrature(w):
    h, n = 0.25, 40
    line = mellin_line(w, 0.3, h, n)
    s = 0.3 + 1j * h * np.arange(-n, n + 1)
    ref = mellin_direct(w, s)
    assert np.allclose(line, ref, atol=1e-11 * np.abs(ref).max())


# -- contour integrals ----------------------------------------------------------


@pytest.mark.parametrize("k", [0, 1])
@pytest.mark.parametrize("y", [1e-3, 0.02, 0.3])
def test_omega_contour_shift_invariance(k, y):
    vals = [omega_k(k, y, W2000, ContourProfile(sigma=s)) for s in SIGMA_GRID[k]]
    for v in vals[1:]:
        assert _rel(v, vals[0]) <= 1e-6


@pytest.mark.parametrize("k", [0, 1])
def test_phi_contour_shift_invariance_with_nonzero_mu(k):
    params = SpectralParams.gl3(0.2, -0.1)
    grid = (-0.6, -0.3, 0.0, 0.3) if k == 0 else (-2.4, -2.0, -1.5, -1.0)
    vals = [phi_k(k, 0.02, params, W2000, ContourProfile(sigma=s)) for s in grid]
    for v in vals[1:]:
        assert _rel(v, vals[0]) <= 1e-6


def test_omega_shift_across_critical_line():
    y = 0.05
    assert _rel(omega_k(0, y, W2000, ContourProfile(sigma=-0.59)), omega_k(0, y, W2000, ContourProfile(sigma=0.5))) < 1e-6


@pytest.mark.parametrize("k", [0, 1])
def test_truncation_doubling_is_stable(k):
    # the adaptive truncation settles at |Im s| = 3200 for this weight; start at twice that
    y = 0.01
    a = omega_k(k, y, W2000)
    b = omega_k(k, y, W2000, ContourProfile(truncation=6400))
    c = omega_k(k, y, W2000, ContourProfile(nodes_per_unit=40))
    assert a != b
    assert _rel(b, a) < 1e-9 and _rel(c, a) < 1e-9


def test_phi_at_trivial_mu_is_two_pi_i_times_omega():
    ys = np.geomspace(2e-3, 2e-2, 6)  # one decade
    for k in (0, 1):
        ratios = [phi_k(k, y, TRIVIAL_GL3, W2000) / omega_k(k, y, W2000) for y in ys]
        for r in ratios:
            assert abs(r - 2j * math.pi) <= 1e-9 * 2 * math.pi
    p, m = phi_pm(0.01, TRIVIAL_GL3, W2000)
    op, om = omega_pm(0.01, W2000)
    assert _rel(p, 2j * math.pi * op) < 1e-9 and _rel(m, 2j * math.pi * om) < 1e-9


def test_phi_pm_needs_gl3():
    with pytest.raises(ValueError):
        phi_pm(0.1, SpectralParams.holomorphic(12), W2000)


@pytest.mark.parametrize("k", [0, 1])
@pytest.mark.parametrize("normalized", [True, False])
def test_fft_table_matches_scalar_route(k, normalized):
    mu = (0.0, 0.0, 0.0) if normalized else (0.2, -0.1, -0.1)
    table = ContourTable(k, W2000, mu, normalized)
    ys = np.array([3e-4, 4e-3, 0.05, 0.7, 9.0])
    got = table(ys)
    for y, g in zip(ys, got):
        ref = (omega_k(k, y, W2000) if normalized else phi_k(k, y, SpectralParams("gl3", mu), W2000))
        assert abs(g - ref) <= 1e-9 * max(abs(ref), 1e-3 * np.abs(got).max())


def test_table_refuses_out_of_range():
    table = pm_table(W2000)
    with pytest.raises(ValueError):
        table(np.array([1e-40]))


def test_pm_table_combines_like_scalar():
    ys = np.array([1e-3, 0.03])
    plus, minus = pm_table(W2000)(ys)
    for y, p, m in zip(ys, plus, minus):
        rp, rm = omega_pm(y, W2000)
        assert _rel(p, rp) < 1e-9 and _rel(m, rm) < 1e-9


def test_phi_decay_window():
    Y = 1e3
    w = simple_bump(Y)
    x0 = Y**0.1 * Y**3 * 10
    plus, minus = pm_table(w, False)(np.array([x0, 4 * x0]) / Y)
    assert np.all(np.abs(plus) <= 1e-6 * Y**3)
    assert np.all(np.abs(minus) <= 1e-6 * Y**3)


@pytest.mark.parametrize("w,C", [(simple_bump(2000.0), 2.0406), (plateau(4.0, 2000.0), 0.6614)])
def test_omega_growth_constant_stable(w, C):
    """max |Omega^+-| / (Delta sqrt(yY)) on yY <= Y^0.1, fitted once and frozen."""
    Y = w.scale
    tab = pm_table(w)
    fitted = []
    for n in (40, 160, 640):
        x = np.geomspace(1e-2, Y**0.1, n)
        mag = np.maximum(*[np.abs(v) for v in tab(x / Y)])
        fitted.append((mag / (w.derivative_bound * np.sqrt(x))).max())
    assert max(fitted) / min(fitted) < 1.001
    assert fitted[-1] == pytest.approx(C, rel=1e-3)


# -- Psi kernels --------------------------------------------------------------------

HOLO = SpectralParams.holomorphic(12)
W5000 = simple_bump(5000.0)


def test_psi_trivial_bound_constant_stable():
    Y = W5000.scale
    fitted = []
    for n in (80, 320):
        x = np.geomspace(1e-2, Y**0.1, n)
        fitted.append((np.abs(psi_pm(x / Y, HOLO, W5000)[1]) / Y).max())
    assert fitted[1] / fitted[0] == pytest.approx(1.0, abs=0.02)
    assert fitted[1] < 0.9


def test_psi_vanishes_at_zero_and_plus_kernel_absent():
    plus, minus = psi_pm(0.0, HOLO, W5000)
    assert plus == 0 and minus == 0
    plus, _ = psi_pm(np.array([0.01, 0.1, 1.0]), HOLO, W5000)
    assert np.all(plus == 0)


@pytest.mark.xfail(strict=True, reason="at yY = 100 Y^0.2 the kernel is still 1.2e-7 Y; it falls below 1e-8 Y from twice that point")
def test_psi_negligible_from_stated_threshold():
    Y = W5000.scale
    x = Y**0.2 * 100 * 2.0 ** np.arange(0, 8)
    assert np.all(np.abs(psi_pm(x / Y, HOLO, W5000)[1]) <= 1e-8 * Y)


def test_psi_negligible_from_twice_threshold():
    Y = W5000.scale
    x = 2 * Y**0.2 * 100 * 2.0 ** np.arange(0, 10)
    assert np.all(np.abs(psi_pm(x / Y, HOLO, W5000)[1]) <= 1e-8 * Y)


def test_psi_matches_direct_quadrature():
    from scipy.integrate import quad
    from scipy.special import jv

    w = plateau(8.0, 5000.0)
    for y in (1e-4, 3e-3, 0.02):
        f = lambda v: float(w(v)) * jv(11, 4 * math.pi * math.sqrt(y * v))  # noqa: E731
        edges = np.linspace(5000, 10000, 65)
        ref = 2 * math.pi * sum(quad(f, a, b, epsabs=0, epsrel=1e-12, limit=200)[0] for a, b in zip(edges[:-1], edges[1:]))
        assert psi_pm(y, HOLO, w)[1].real == pytest.approx(ref, rel=1e-9, abs=1e-12 * 5000)


def test_psi_sign_follows_weight():
    # 4 pi sqrt(yY u) stays below the first zero of J_11 and J_13, so the sign is that of i^k
    x = np.array([0.05, 0.5]) / 5000
    assert np.all(psi_pm(x, SpectralParams.holomorphic(12), W5000)[1].real > 0)
    assert np.all(psi_pm(x, SpectralParams.holomorphic(14), W5000)[1].real < 0)


def test_maass_kernel_gated():
    with pytest.raises(UnsupportedKernelError):
        psi_pm(0.01, SpectralParams.maass(3.2), W5000)
    plus, minus = psi_pm(np.array([1e-4, 1e-3]), SpectralParams.maass(3.2), W5000, maass_enabled=True)
    assert np.all(np.isfinite(plus)) and np.all(np.isfinite(minus))


def test_psi_linear_in_weight():
    y = np.array([1e-4, 2e-3])
    a = psi_pm(y, HOLO, W5000)[1]
    b = psi_pm(y, HOLO, W5000.scaled_by(-2.5))[1]
    assert np.allclose(b, -2.5 * a, rtol=1e-13)


# -- cutoffs ---------------------------------------------------------------------------


def test_dual_cutoff_examples():
    Y = 1e4
    assert dual_cutoff(1, Y) == math.ceil(10 * Y**0.1 / Y) == 1
    assert dual_cutoff(2, Y, exact=True) == pytest.approx(8 * dual_cutoff(1, Y, exact=True))
    d1 = dual_cutoff(3, Y, kind="delta", delta=1.0, exact=True)
    d2 = dual_cutoff(3, Y, kind="delta", delta=2.0, exact=True)
    assert d2 == pytest.approx(8 * d1)
    with pytest.raises(ValueError):
        dual_cutoff(1, Y, kind="gl5")


@given(st.integers(1, 50), st.floats(10, 1e6), st.floats(1, 20))
@settings(max_examples=50)
def test_dual_cutoff_cubic_in_q(q, Y, P):
    assert dual_cutoff(2 * q, Y, P, exact=True) == pytest.approx(8 * dual_cutoff(q, Y, P, exact=True))
    assert dual_cutoff(q, Y, P) >= 1


def test_kernel_extent_finds_decay_point():
    ext = kernel_extent(lambda x: np.exp(-x), 0.1, 1e-6)
    assert math.log(1e6) * 0.9 < ext < math.log(1e6) * 1.3
