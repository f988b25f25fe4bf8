"""Scalar special functions and the constants gamma, gamma_1."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import special as sp


class PoleError(ValueError):
    """Argument is a pole of the gamma function."""


def _is_pole(z: complex) -> bool:
    return z.imag == 0 and z.real <= 0 and float(z.real).is_integer()


def log_gamma_complex(z) -> complex:
    """Principal branch of log Gamma(z)."""
    z = complex(z)
    if _is_pole(z):
        raise PoleError(f"Gamma has a pole at {z}")
    return complex(sp.loggamma(z))


def log_gamma_array(z: np.ndarray) -> np.ndarray:
    """Vectorized log Gamma; poles map to +inf so that 1/Gamma evaluates to 0."""
    z = np.asarray(z, dtype=complex)
    with np.errstate(all="ignore"):
        out = sp.loggamma(z)
    pole = (z.imag == 0) & (z.real <= 0) & (np.round(z.real) == z.real)
    out = np.where(pole, np.inf + 0j, out)
    return out


def bessel_j(nu: float, x) -> np.ndarray | float:
    """J_nu(x) for real order nu >= 0 and x >= 0."""
    if nu < 0:
        raise ValueError("order must be nonnegative")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("argument must be nonnegative")
    out = sp.jv(nu, x)
    return float(out) if out.ndim == 0 else out


# -- Euler-Maclaurin constants ------------------------------------------------


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """B_n with B_1 = -1/2."""
    B = [Fraction(1)]
    for m in range(1, n + 1):
        B.append(-sum(math.comb(m + 1, k) * B[k] for k in range(m)) / (m + 1))
    return B[n]


def _harmonic(m: int) -> Fraction:
    return sum((Fraction(1, i) for i in range(1, m + 1)), Fraction(0))


def euler_gamma(n: int = 40, terms: int = 12) -> float:
    """gamma = lim (H_n - log n), Euler-Maclaurin tail-corrected at depth n."""
    H = math.fsum(1.0 / k for k in range(1, n + 1))
    corr = [H, -math.log(n), -1.0 / (2 * n)]
    for j in range(1, terms + 1):
        corr.append(float(bernoulli(2 * j)) / (2 * j * n ** (2 * j)))
    return math.fsum(corr)


def stieltjes_gamma1(n: int = 40, terms: int = 12) -> float:
    """gamma_1 = lim (sum_{k<=n} log k / k - (log n)^2 / 2), tail-corrected.

    Uses f(x) = log x / x with f^(m)(x) = (-1)^m m! (log x - H_m) / x^(m+1).
    """
    L = math.log(n)
    parts = [math.log(k) / k for k in range(2, n + 1)]
    parts += [-L * L / 2, -L / (2 * n)]
    for j in range(1, terms + 1):
        m = 2 * j - 1
        deriv = -math.factorial(m) * (L - float(_harmonic(m))) / n ** (m + 1)
        parts.append(-float(bernoulli(2 * j)) / math.factorial(2 * j) * deriv)
    return math.fsum(parts)


@lru_cache(maxsize=1)
def constants() -> tuple[float, float]:
    """(gamma, gamma_1)."""
    return euler_gamma(), stieltjes_gamma1()
