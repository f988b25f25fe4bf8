"""Circle-method machinery: moduli sets, the interval-average indicator on R/Z,
its exact L^2 defect, and Poisson summation in the shift variable h.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from . import arith
from .errors import EmptyModuliError, ToleranceError
from .weights import SmoothWeight


def _exact(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class ModuliSet:
    members: tuple[int, ...]
    L: int
    Q: float
    eta: Fraction

    def __post_init__(self):
        if not self.members:
            raise EmptyModuliError("moduli set is empty")
        if any(q < 1 or q > self.Q for q in self.members):
            raise ValueError("all moduli must lie in [1, Q]")
        if self.L != sum(arith.euler_phi(q) for q in self.members):
            raise ValueError("L must equal the sum of phi(q)")
        eta = _exact(self.eta)
        object.__setattr__(self, "eta", eta)
        Qf = Fraction(self.Q)
        if not (1 / (Qf * Qf) <= eta <= 1 / Qf):
            raise ValueError(f"eta={float(eta)} outside [Q^-2, Q^-1] for Q={self.Q}")
        if eta > Fraction(1, 2):
            raise ValueError("eta must be at most 1/2")

    @classmethod
    def of(cls, members, eta, Q: float | None = None) -> "ModuliSet":
        """Arbitrary moduli; Q defaults to the smallest value compatible with eta."""
        members = tuple(sorted(set(int(q) for q in members)))
        if not members:
            raise EmptyModuliError("moduli set is empty")
        if Q is None:
            # nudge up so float rounding cannot push Q^-2 above eta
            Q = max(float(members[-1]), float(_exact(eta)) ** -0.5 * (1 + 1e-12))
        return cls(members, sum(arith.euler_phi(q) for q in members), Q, _exact(eta))


def build_moduli_set(Q: float, r: int, eta) -> ModuliSet:
    """Primes q in [Q/2, Q] with gcd(q, r) = 1."""
    if Q < 2 or r < 1:
        raise ValueError("need Q >= 2 and r >= 1")
    primes = [p for p in arith.prime_list(math.ceil(Q / 2), math.floor(Q)) if math.gcd(p, r) == 1]
    if not primes:
        raise EmptyModuliError(f"no primes in [{Q / 2}, {Q}] coprime to {r}")
    return ModuliSet(tuple(primes), sum(p - 1 for p in primes), float(Q), _exact(eta))


@dataclass(frozen=True)
class IndicatorApprox:
    """(1 / 2 eta L) * sum_q sum_{c mod q}^* indicator of [c/q - eta, c/q + eta], on R/Z."""

    centers: tuple[Fraction, ...]
    eta: Fraction
    L: int

    @property
    def height_exact(self) -> Fraction:
        return 1 / (2 * self.eta * self.L)

    @property
    def height(self) -> float:
        return float(self.height_exact)

    @property
    def intervals(self) -> list[tuple[Fraction, Fraction]]:
        return [(c, self.eta) for c in self.centers]

    def mass(self) -> Fraction:
        """Exact integral over R/Z."""
        return len(self.centers) * 2 * self.eta * self.height_exact

    def translated(self, rho) -> "IndicatorApprox":
        rho = _exact(rho)
        return IndicatorApprox(tuple(sorted((c + rho) % 1 for c in self.centers)), self.eta, self.L)

    def __call__(self, beta) -> np.ndarray:
        """Pointwise value (floating point; boundaries have measure zero)."""
        beta = np.atleast_1d(np.asarray(beta, dtype=float))
        cen = np.array([float(c) for c in self.centers])
        d = np.abs((beta[:, None] - cen[None, :] + 0.5) % 1.0 - 0.5)
        return (d <= float(self.eta)).sum(axis=1) * self.height


def indicator_approx(moduli: ModuliSet) -> IndicatorApprox:
    centers = []
    for q in moduli.members:
        for c in range(1, q + 1):
            if math.gcd(c, q) == 1:
                centers.append(Fraction(c, q) % 1)
    return IndicatorApprox(tuple(sorted(centers)), moduli.eta, moduli.L)


def _events(approx: IndicatorApprox) -> list[tuple[Fraction, int]]:
    eta = approx.eta
    ev = []
    for c in approx.centers:
        a, b = c - eta, c + eta
        if 2 * eta >= 1:
            raise ValueError("intervals must be shorter than the circle")
        if a < 0:
            ev += [(a + 1, 1), (Fraction(1), -1), (Fraction(0), 1), (b, -1)]
        elif b > 1:
            ev += [(a, 1), (Fraction(1), -1), (Fraction(0), 1), (b - 1, -1)]
        else:
            ev += [(a, 1), (b, -1)]
    ev.sort()
    return ev


def coverage_segments(approx: IndicatorApprox) -> list[tuple[Fraction, Fraction, int]]:
    """Elementary segments (start, end, multiplicity) partitioning [0, 1]."""
    segs = []
    pos, depth = Fraction(0), 0
    for x, d in _events(approx):
        if x > pos:
            segs.append((pos, x, depth))
            pos = x
        depth += d
    if pos < 1:
        segs.append((pos, Fraction(1), depth))
    return segs


def l2_defect(approx: IndicatorApprox) -> float:
    """int_0^1 (1 - I~(beta))^2 d beta, exactly up to the final float accumulation."""
    h = approx.height_exact
    parts = []
    for a, b, k in coverage_segments(approx):
        parts.append(float((1 - k * h) ** 2) * float(b - a))
    return math.fsum(parts)


def defect_scaling(Qs, r: int = 1) -> list[tuple[int, float]]:
    """(Q, D(Q)) for prime moduli sets with eta = Q^-2."""
    out = []
    for Q in Qs:
        ms = build_moduli_set(Q, r, Fraction(1, Q * Q))
        out.append((Q, l2_defect(indicator_approx(ms))))
    return out


# -- Poisson summation in h --------------------------------------------------------


class PoissonCheck(NamedTuple):
    direct: complex
    dual: complex
    error: float
    terms_used: int


def _gl_grid(a, b, panels, order=20):
    g, wg = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    return (mid + half * g).ravel(), (half * wg).ravel()


def poisson_hsum_check(c: int, q: int, H: float, m: float, base: float, beta: float, W: SmoothWeight,
                       phi: SmoothWeight, cutoff: int | None = None, tol: float = 1e-12,
                       max_cutoff: int = 1 << 14) -> PoissonCheck:
    """sum_{h>=1} e(ch/q) W(h/H) phi(m/(base+h)) e(beta h) against H sum_{h = -c mod q} I(h).

    I(h) = int W(v) phi(m/(base+Hv)) e((beta - h/q) H v) dv. Without an explicit
    ``cutoff`` the dual range |h| <= K doubles until the newest shell contributes
    less than ``tol`` times the absolute mass sum |W(h/H) phi(...)| of the direct side.
    """
    if math.gcd(c, q) != 1:
        raise ValueError("c and q must be coprime")
    if H < 1:
        raise ValueError("H must be at least 1")
    lo, hi = W.unit_support
    hs = np.arange(max(1, math.ceil(lo * H)), math.floor(hi * H) + 1)
    amp = W.unit_twisted(hs / H) * phi(m / (base + hs))
    direct = complex(np.sum(np.exp(2j * math.pi * ((c * hs) % q) / q) * amp * np.exp(2j * math.pi * beta * hs)))
    g = lambda v: W.unit_twisted(v) * phi(m / (base + H * v))  # noqa: E731

    def shell(k_lo, k_hi):
        # h = -c + q j with k_lo <= |h| <= k_hi
        js = np.arange(math.floor((-k_hi + c) / q), math.ceil((k_hi + c) / q) + 1)
        h = -c + q * js
        h = h[(np.abs(h) <= k_hi) & (np.abs(h) >= k_lo)]
        if len(h) == 0:
            return 0j, 0
        freq = np.abs(beta - h / q).max() * H
        panels = int(max(16, freq * (hi - lo)))
        v, w = _gl_grid(lo, hi, panels)
        gv = g(v) * w
        phase = np.exp(2j * math.pi * np.outer(beta - h / q, H * v))
        return complex(H * (phase @ gv).sum()), len(h)

    if cutoff is not None:
        dual, n = shell(0, cutoff)
        return PoissonCheck(direct, dual, abs(direct - dual), n)
    K = max(q, 4)
    dual, n = shell(0, K)
    scale = max(float(np.abs(amp).sum()), 1e-300)
    while True:
        add, k = shell(K + 1, 2 * K)
        dual += add
        n += k
        K *= 2
        if abs(add) <= tol * scale and k > 0:
            break
        if K > max_cutoff:
            raise ToleranceError("dual h-sum did not settle")
    return PoissonCheck(direct, dual, abs(direct - dual), n)


# (c, q, H, m, base, beta); phi is the [1/2, 5/2] bump equal to 1 on [1, 2], and
# several cases put m / (base + h) on one of its ramps. Six cases are near-resonant
# (beta = -c/q + small), so the direct side is of size H; the other four have
# frequency c/q away from the integers and check that the dual side reproduces
# the resulting near-total cancellation.
STANDARD_POISSON_CASES = (
    (1, 1, 50.0, 1500.0, 1000.0, 0.0),
    (2, 5, 80.0, 3000.0, 2000.0, -2 / 5 + 0.004),
    (3, 7, 120.0, 5000.0, 3000.0, -3 / 7 + 0.002),
    (1, 3, 100.0, 700.0, 1000.0, 0.0),
    (4, 11, 60.0, 2600.0, 1000.0, -4 / 11 + 0.01),
    (5, 13, 200.0, 900.0, 700.0, 0.0),
    (1, 2, 40.0, 100.0, 10.0, -1 / 2 + 0.02),
    (6, 17, 150.0, 4000.0, 2500.0, -6 / 17 - 0.003),
    (7, 19, 90.0, 1500.0, 1200.0, 0.0),
    (2, 9, 256.0, 1000.0, 900.0, -2 / 9 + 0.001),
)
