"""Both sides of the GL(2), GL(3) and d3 Voronoi summation formulas.

Dual sums are truncated at max(window cutoff, empirical cutoff): starting from the
window value, M doubles until the partial sums stop moving, i.e. the changes
over the last two half-blocks (M/4, M/2] and (M/2, M] both fall below ``tol``
times the size of the left-hand side. The larger change is reported as the
truncation bound.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, NamedTuple

import numpy as np

from . import arith
from .coeffs import CoefficientOracle, CoefficientTable
from .errors import BudgetError, NotCoprimeError, RangeNotCoveredError, UnsupportedKernelError
from .special import constants
from .transforms import SpectralParams, dual_cutoff, log_moments, psi_pm, pm_table
from .weights import SmoothWeight

CSV_HEADER = ("q", "c", "Y", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "abs_error", "rel_error", "terms_used")
NORMALIZATIONS = ("residue", "literal")
DEFAULT_MAX_TERMS = 1 << 18


@dataclass(frozen=True)
class VoronoiReport:
    q: int
    c: int
    Y: float
    lhs: complex
    dual_sum: complex
    main_terms: complex
    truncation_bound: float
    terms_used: int

    @property
    def rhs(self) -> complex:
        return self.dual_sum + self.main_terms

    @property
    def abs_error(self) -> float:
        return abs(self.lhs - self.dual_sum - self.main_terms)

    @property
    def rel_error(self) -> float:
        return self.abs_error / max(abs(self.lhs), 1e-300)

    def csv_row(self) -> list[str]:
        rhs = self.rhs
        vals = (self.lhs.real, self.lhs.imag, rhs.real, rhs.imag, self.abs_error, self.rel_error)
        return [str(self.q), str(self.c), repr(float(self.Y))] + [f"{v:.17e}" for v in vals] + [str(self.terms_used)]


def write_reports_csv(reports: Iterable[VoronoiReport], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in reports:
            w.writerow(r.csv_row())


def _inverse(c: int, q: int) -> int:
    if math.gcd(c, q) != 1:
        raise NotCoprimeError(f"gcd({c}, {q}) != 1")
    return int(arith.mod_inverse(c, q))


def _half_block_change(t: np.ndarray) -> float:
    """max(|S_M - S_{M/2}|, |S_{M/2} - S_{M/4}|) for partial sums S of ``t``."""
    M = len(t)
    return max(abs(t[M // 2 :].sum()), abs(t[M // 4 : M // 2].sum()))


def _grow_until_settled(term_fn, M0: int, tol: float, scale: float, max_terms: int):
    """Double M from M0 until the partial sums settle to tol * scale.

    ``term_fn(M)`` returns the terms for indices 1..M.
    """
    M = max(4, M0)
    while True:
        t = term_fn(M)
        tail = _half_block_change(t)
        if tail <= tol * scale:
            return t, tail, M
        if 2 * M > max_terms:
            raise BudgetError(f"dual sum not settled within {max_terms} terms (change {tail:.3e})")
        M *= 2


# -- d3 main terms --------------------------------------------------------------


def _log_divisor_sums(n: int) -> tuple[int, float, float]:
    ds = arith.divisors(n)
    return len(ds), math.fsum(math.log(d) for d in ds), math.fsum(math.log(d) ** 2 for d in ds)


def p1(n: int, q: int) -> float:
    if q % n:
        raise ValueError("n must divide q")
    gamma, _ = constants()
    tau, s1, _ = _log_divisor_sums(n)
    return 5.0 / 3.0 * math.log(n) - 3 * math.log(q) + 3 * gamma - s1 / (3 * tau)


def p2(n: int, q: int) -> float:
    if q % n:
        raise ValueError("n must divide q")
    gamma, gamma1 = constants()
    tau, s1, s2 = _log_divisor_sums(n)
    ln, lq = math.log(n), math.log(q)
    poly = [ln * ln, -5 * lq * ln, 4.5 * lq * lq, 3 * gamma**2, -3 * gamma1, 7 * gamma * ln, -9 * gamma * lq]
    poly.append(((ln + lq - 5 * gamma) * s1 - 1.5 * s2) / tau)
    return math.fsum(poly)


def d3_main_terms(c: int, q: int, weight: SmoothWeight, normalization: str = "residue") -> complex:
    """The three residue lines of the d3 formula.

    ``normalization="literal"`` uses the printed coefficients 1/(2q^2), 1/(2q^2),
    1/(4q^2); ``"residue"`` doubles all three, which is what the zeta^3 residue
    at s = 1 produces and what makes the identity hold numerically.
    """
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    cbar = _inverse(c, q)
    w0, w1, w2 = log_moments(weight)
    total = 0.0
    for n in arith.divisors(q):
        ram = arith.ramanujan_sum(cbar, q // n)
        if ram == 0:
            continue
        tau = arith.divisor_count(n)
        total += n * tau * ram * (p2(n, q) * w0 / 2 + p1(n, q) * w1 / 2 + w2 / 4)
    factor = 2.0 if normalization == "residue" else 1.0
    return complex(factor * total / q**2)


# -- d3 check -------------------------------------------------------------------


def d3_lhs(c: int, q: int, weight: SmoothWeight) -> complex:
    lo, hi = weight.support
    N = int(math.floor(hi))
    d3 = arith.sieve_d3(max(N, 1)).values
    n = np.arange(int(math.ceil(lo)), N + 1)
    w = weight(n)
    phase = np.exp(2j * math.pi * ((c * n) % q) / q)
    return complex(np.sum(d3[n] * w * phase))


@lru_cache(maxsize=64)
def _d3_dual_parts(q: int, weight: SmoothWeight, M: int):
    """c-independent pieces of the d3 dual sum: (n, coefficient / (n m), Omega^+, Omega^-) per n | q."""
    table = pm_table(weight)
    m = np.arange(1, M + 1)
    parts = []
    for n in arith.divisors(q):
        coef = np.zeros(M + 1)
        for n1 in arith.divisors(n):
            for n2 in arith.divisors(n // n1):
                coef += arith.sigma00_table(n // (n1 * n2), M)
        op, om = table(m * n**2 / q**3 / 1.0)
        parts.append((n, coef[1:] / (n * m), op, om))
    return parts


def _d3_dual_terms(cbar: int, q: int, weight: SmoothWeight, M: int) -> np.ndarray:
    """Per-m terms (q / 2 pi^{3/2}) sum_{n | q} (...) for m = 1..M."""
    m = np.arange(1, M + 1)
    out = np.zeros(M, dtype=complex)
    for n, coef, op, om in _d3_dual_parts(q, weight, M):
        mod = q // n
        krow = arith.kloosterman_row(cbar % mod, mod)
        out += coef * (krow[m % mod] * op + krow[(-m) % mod] * om)
    return out * q / (2 * math.pi**1.5)


def d3_voronoi_check(c: int, q: int, weight: SmoothWeight, tol: float = 1e-5, eps: float = 0.1,
                     safety: float = 10.0, normalization: str = "residue",
                     max_terms: int = DEFAULT_MAX_TERMS) -> VoronoiReport:
    cbar = _inverse(c, q)
    Y = weight.scale
    lhs = d3_lhs(c, q, weight)
    main = d3_main_terms(c, q, weight, normalization)
    M0 = dual_cutoff(q, Y, weight.derivative_bound, "gl3", eps, safety)
    scale = max(abs(lhs), 1e-300)
    terms, tail, M = _grow_until_settled(lambda M: _d3_dual_terms(cbar, q, weight, M), M0, tol, scale, max_terms)
    return VoronoiReport(q, c, Y, lhs, complex(terms.sum()), main, tail, M)


# -- GL(2) check ------------------------------------------------------------------


class _PsiCache:
    """Psi^+- at y = m / q^2, extended on demand."""

    def __init__(self, q, params, weight, maass_enabled):
        self.q, self.params, self.weight, self.maass = q, params, weight, maass_enabled
        self.plus = np.zeros(0, dtype=complex)
        self.minus = np.zeros(0, dtype=complex)

    def upto(self, M):
        have = len(self.minus)
        if M > have:
            m = np.arange(have + 1, M + 1)
            p, n = psi_pm(m / self.q**2, self.params, self.weight, self.maass)
            self.plus = np.concatenate([self.plus, p])
            self.minus = np.concatenate([self.minus, n])
        return self.plus[:M], self.minus[:M]


def gl2_voronoi_check(c: int, q: int, weight: SmoothWeight, params: SpectralParams, coeffs: CoefficientTable,
                      tol: float = 1e-8, eps: float = 0.1, safety: float = 10.0, maass_enabled: bool = False,
                      psi_cache: _PsiCache | None = None) -> VoronoiReport:
    """sum a(m) e(cm/q) psi(m) against (1/q) sum_m a(m) e(-cbar m/q) Psi^-(m/q^2).

    For Maass forms (behind the flag) the table is read as an even form,
    a(-m) = a(m), and the Psi^+ line is included.
    """
    if params.kind == "gl2_maass" and not maass_enabled:
        raise UnsupportedKernelError("Maass kernels are disabled (set maass_kernels=True)")
    cbar = _inverse(c, q)
    a = coeffs.values()
    lo, hi = weight.support
    N = int(math.floor(hi))
    if N > coeffs.limit:
        raise RangeNotCoveredError(f"coefficient table stops at {coeffs.limit}, need {N}")
    n = np.arange(int(math.ceil(lo)), N + 1)
    lhs = complex(np.sum(a[n] * weight(n) * np.exp(2j * math.pi * ((c * n) % q) / q)))
    cache = psi_cache or _PsiCache(q, params, weight, maass_enabled)

    def terms(M):
        if M > coeffs.limit:
            raise RangeNotCoveredError(f"dual sum needs coefficients up to {M}, table stops at {coeffs.limit}")
        m = np.arange(1, M + 1)
        plus, minus = cache.upto(M)
        t = a[1 : M + 1] * np.exp(-2j * math.pi * ((cbar * m) % q) / q) * minus
        if params.kind == "gl2_maass":
            t = t + a[1 : M + 1] * np.exp(2j * math.pi * ((cbar * m) % q) / q) * plus
        return t / q

    M0 = dual_cutoff(q, weight.scale, weight.derivative_bound, "gl2", eps, safety)
    t, tail, M = _grow_until_settled(terms, M0, tol, max(abs(lhs), 1e-300), coeffs.limit * 2)
    return VoronoiReport(q, c, weight.scale, lhs, complex(t.sum()), 0j, tail, M)


# -- GL(3) dual side --------------------------------------------------------------


class DualAssembly(NamedTuple):
    value: complex
    truncation_bound: float
    terms_used: int


def gl3_dual_assemble(c: int, q: int, weight: SmoothWeight, params: SpectralParams, oracle: CoefficientOracle,
                      M: int | None = None, eps: float = 0.1, safety: float = 10.0) -> DualAssembly:
    """(q pi^{-5/2} / 4i) sum_pm sum_{n1 | q} sum_{n2 <= M} A(n2, n1)/(n1 n2) S(cbar, +-n2; q/n1) Phi^+-(n1^2 n2 / q^3)."""
    if params.kind != "gl3":
        raise ValueError("gl3_dual_assemble needs GL(3) parameters")
    cbar = _inverse(c, q)
    if M is None:
        M = dual_cutoff(q, weight.scale, weight.derivative_bound, "gl3", eps, safety)
    table = pm_table(weight, False, tuple(params.mu))
    n2 = np.arange(1, M + 1)
    terms = np.zeros(M, dtype=complex)
    for n1 in arith.divisors(q):
        A = np.fromiter((oracle.dual(int(k), n1) for k in n2), dtype=float, count=M)
        if not A.any():
            continue
        mod = q // n1
        krow = arith.kloosterman_row(cbar % mod, mod)
        pp, pm = table(n1**2 * n2 / q**3 / 1.0)
        terms += A / (n1 * n2) * (krow[n2 % mod] * pp + krow[(-n2) % mod] * pm)
    pref = q * math.pi**-2.5 / 4j
    value = pref * terms.sum()
    tail = abs(pref) * _half_block_change(terms)
    return DualAssembly(complex(value), tail, M)
