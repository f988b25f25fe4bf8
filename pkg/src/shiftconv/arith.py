"""Exact integer arithmetic: inverses, Kloosterman and Ramanujan sums, sieves.

All scalar functions are pure. Sieve tables are returned read-only so they can
be shared freely once built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np

from .errors import CapacityError, NotCoprimeError

DEFAULT_MEMORY_BUDGET = 200_000_000
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Residue:
    value: int
    modulus: int

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError("modulus must be positive")
        if not 0 <= self.value < self.modulus:
            raise ValueError(f"residue {self.value} out of range mod {self.modulus}")

    def __int__(self):
        return self.value


def mod_inverse(a: int, q: int) -> Residue:
    if q < 1:
        raise ValueError("modulus must be positive")
    if q == 1:
        return Residue(0, 1)
    if math.gcd(a, q) != 1:
        raise NotCoprimeError(f"gcd({a}, {q}) = {math.gcd(a, q)} != 1")
    return Residue(pow(a, -1, q), q)


def e(x):
    """exp(2 pi i x) with the argument reduced mod 1 first."""
    return np.exp(TWO_PI * 1j * np.mod(x, 1.0))


def e_ratio(num, den: int):
    """exp(2 pi i num/den) for integer ``num`` (scalar or array), exact reduction."""
    return np.exp(TWO_PI * 1j * (np.mod(num, den) / den))


def divisors(n: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def factorize(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def mobius(n: int) -> int:
    f = factorize(n)
    if any(k > 1 for k in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def euler_phi(n: int) -> int:
    out = n
    for p in factorize(n):
        out -= out // p
    return out


def divisor_count(n: int) -> int:
    return math.prod(k + 1 for k in factorize(n).values())


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return factorize(n) == {n: 1}


@lru_cache(maxsize=4096)
def _unit_table(c: int) -> tuple[np.ndarray, np.ndarray]:
    units = np.array([x for x in range(1, c + 1) if math.gcd(x, c) == 1], dtype=np.int64)
    inv = np.array([pow(int(x), -1, c) if c > 1 else 0 for x in units], dtype=np.int64)
    units.setflags(write=False)
    inv.setflags(write=False)
    return units, inv


def kloosterman(m: int, n: int, c: int) -> float:
    """S(m, n; c) by enumeration over reduced residues."""
    if c < 1:
        raise ValueError("c must be positive")
    if c == 1:
        return 1.0
    units, inv = _unit_table(c)
    phase = (m * units + n * inv) % c  # exact integer phase before scaling
    z = np.exp(TWO_PI * 1j * phase / c).sum()
    if abs(z.imag) > 1e-9:
        raise ArithmeticError(f"Kloosterman sum S({m},{n};{c}) has imaginary part {z.imag}")
    return float(z.real)


def kloosterman_row(n: int, c: int) -> np.ndarray:
    """Array K with K[r] = S(r, n; c) for r = 0..c-1 (S is c-periodic in each argument)."""
    if c == 1:
        return np.ones(1)
    units, inv = _unit_table(c)
    r = np.arange(c, dtype=np.int64)[:, None]
    phase = (r * units[None, :] + n * inv[None, :]) % c
    z = np.exp(TWO_PI * 1j * phase / c).sum(axis=1)
    if np.abs(z.imag).max() > 1e-9:
        raise ArithmeticError("Kloosterman row has non-negligible imaginary part")
    return z.real.copy()


def kloosterman_matrix(c: int) -> np.ndarray:
    """S(m, n; c) for all 0 <= m, n < c, as cos/sin table products over reduced residues."""
    if c < 1:
        raise ValueError("c must be positive")
    if c == 1:
        return np.ones((1, 1))
    units, inv = _unit_table(c)
    r = np.arange(c, dtype=np.int64)[:, None]
    a = TWO_PI * ((r * units[None, :]) % c) / c
    b = TWO_PI * ((r * inv[None, :]) % c) / c
    return np.cos(a) @ np.cos(b).T - np.sin(a) @ np.sin(b).T


def ramanujan_sum(m: int, q: int) -> int:
    """c_q(m) via the divisor formula sum_{d | (m, q)} d mu(q/d)."""
    if q < 1:
        raise ValueError("q must be positive")
    g = math.gcd(m, q)
    return sum(d * mobius(q // d) for d in divisors(g))


def sigma00(k: int, l: int) -> int:
    """Number of pairs (d1, d2) with d1 | l, d2 | l/d1 and gcd(d2, k) = 1."""
    if k < 1 or l < 1:
        raise ValueError("k and l must be positive")
    return sum(1 for d1 in divisors(l) for d2 in divisors(l // d1) if math.gcd(d2, k) == 1)


def sigma00_table(k: int, M: int) -> np.ndarray:
    """sigma00(k, l) for l = 0..M (index 0 unused), as the convolution tau * 1_{(., k) = 1}."""
    tau = np.zeros(M + 1, dtype=np.int64)
    for i in range(1, M + 1):
        tau[i::i] += 1
    out = np.zeros(M + 1, dtype=np.int64)
    for d2 in range(1, M + 1):
        if math.gcd(d2, k) == 1:
            out[d2::d2] += tau[1 : M // d2 + 1]
    return out


SieveKind = Literal["d3", "divisor_count", "mobius"]


@dataclass(frozen=True)
class SieveTable:
    kind: str
    limit: int
    values: np.ndarray  # index 0 unused

    def __getitem__(self, n):
        return self.values[n]

    def __len__(self):
        return self.limit


def _check_budget(N: int, budget: int):
    if N < 1:
        raise ValueError("N must be positive")
    if N > budget:
        raise CapacityError(f"table of {N} entries exceeds memory budget {budget}")


def _freeze(kind: str, N: int, values: np.ndarray) -> SieveTable:
    values.setflags(write=False)
    return SieveTable(kind, N, values)


def sieve_d3(N: int, budget: int = DEFAULT_MEMORY_BUDGET) -> SieveTable:
    """d3(n) for n <= N via (1*1)*1, two divisor-convolution passes."""
    _check_budget(N, budget)
    d2 = np.zeros(N + 1, dtype=np.int64)
    for i in range(1, N + 1):
        d2[i::i] += 1
    d3 = np.zeros(N + 1, dtype=np.int64)
    for i in range(1, N + 1):
        d3[i::i] += d2[1 : N // i + 1]
    return _freeze("d3", N, d3)


def sieve_multiplicative(kind: SieveKind, N: int, budget: int = DEFAULT_MEMORY_BUDGET) -> SieveTable:
    """Linear sieve for the divisor count or the Mobius function."""
    if kind == "d3":
        return sieve_d3(N, budget)
    if kind not in ("divisor_count", "mobius"):
        raise ValueError(f"unknown sieve kind {kind!r}")
    _check_budget(N, budget)
    lp = [0] * (N + 1)  # least prime factor
    expo = [0] * (N + 1)  # exponent of lp in n
    tau = [0] * (N + 1)
    mu = [0] * (N + 1)
    if N >= 1:
        tau[1] = mu[1] = 1
    primes: list[int] = []
    for i in range(2, N + 1):
        if lp[i] == 0:
            lp[i] = i
            primes.append(i)
            expo[i] = 1
            tau[i] = 2
            mu[i] = -1
        for p in primes:
            ip = i * p
            if p > lp[i] or ip > N:
                break
            lp[ip] = p
            if p == lp[i]:
                expo[ip] = expo[i] + 1
                tau[ip] = tau[i] // (expo[i] + 1) * (expo[i] + 2)
                mu[ip] = 0
            else:
                expo[ip] = 1
                tau[ip] = tau[i] * 2
                mu[ip] = -mu[i]
    vals = tau if kind == "divisor_count" else mu
    return _freeze(kind, N, np.array(vals, dtype=np.int64))


def prime_list(lo: int, hi: int) -> list[int]:
    """Primes p with lo <= p <= hi."""
    if hi < 2:
        return []
    flags = np.ones(hi + 1, dtype=bool)
    flags[:2] = False
    for i in range(2, math.isqrt(hi) + 1):
        if flags[i]:
            flags[i * i :: i] = False
    return [int(p) for p in np.nonzero(flags)[0] if p >= lo]
