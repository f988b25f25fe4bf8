"""Number-theoretic transforms over word-size primes p = c * 2**23 + 1 < 2**31.

Residues stay below 2**31, so a product of two fits in int64 and every
butterfly is a plain numpy expression.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .arith import factorize

ROOT_ORDER_BITS = 23


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@lru_cache(maxsize=1)
def ntt_primes() -> tuple[int, ...]:
    """All primes c * 2**23 + 1 below 2**31, largest first."""
    out = [c * (1 << ROOT_ORDER_BITS) + 1 for c in range(1, 256)]
    return tuple(sorted((p for p in out if p < (1 << 31) and _is_prime(p)), reverse=True))


@lru_cache(maxsize=None)
def primitive_root(p: int) -> int:
    qs = list(factorize(p - 1))
    g = 2
    while any(pow(g, (p - 1) // q, p) == 1 for q in qs):
        g += 1
    return g


@lru_cache(maxsize=64)
def _bitrev(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n, dtype=np.int64)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


@lru_cache(maxsize=256)
def _twiddles(p: int, half: int, inverse: bool) -> np.ndarray:
    root = pow(primitive_root(p), (p - 1) // (2 * half), p)
    if inverse:
        root = pow(root, p - 2, p)
    w = np.empty(half, dtype=np.int64)
    acc = 1
    for i in range(half):
        w[i] = acc
        acc = acc * root % p
    return w


def ntt(a: np.ndarray, p: int, inverse: bool = False) -> np.ndarray:
    """In-order radix-2 transform of ``a`` (length a power of two) modulo ``p``."""
    n = len(a)
    if n & (n - 1):
        raise ValueError("length must be a power of two")
    if n > (1 << ROOT_ORDER_BITS):
        raise ValueError("transform length exceeds 2**23")
    x = np.asarray(a, dtype=np.int64)[_bitrev(n)] % p
    length = 2
    while length <= n:
        half = length // 2
        w = _twiddles(p, half, inverse)
        x = x.reshape(-1, length)
        u = x[:, :half].copy()
        v = x[:, half:] * w % p
        x[:, :half] = (u + v) % p
        x[:, half:] = (u - v) % p
        x = x.reshape(-1)
        length *= 2
    if inverse:
        x = x * pow(n, p - 2, p) % p
    return x


def square_mod(a: np.ndarray, p: int, keep: int) -> np.ndarray:
    """First ``keep`` coefficients of a(x)**2 modulo p."""
    need = min(2 * len(a) - 1, 2 * keep - 1)
    n = 1
    while n < need:
        n *= 2
    buf = np.zeros(n, dtype=np.int64)
    m = min(len(a), keep)
    buf[:m] = a[:m] % p
    f = ntt(buf, p)
    return ntt(f * f % p, p, inverse=True)[:keep]


def multiply_mod(a: np.ndarray, b: np.ndarray, p: int, keep: int | None = None) -> np.ndarray:
    full = len(a) + len(b) - 1
    keep = full if keep is None else keep
    n = 1
    while n < full:
        n *= 2
    fa = np.zeros(n, dtype=np.int64)
    fb = np.zeros(n, dtype=np.int64)
    fa[: len(a)] = np.asarray(a) % p
    fb[: len(b)] = np.asarray(b) % p
    return ntt(ntt(fa, p) * ntt(fb, p) % p, p, inverse=True)[:keep]


def crt_signed(residues: list[np.ndarray], primes: list[int]) -> list[int]:
    """Garner reconstruction with symmetric lift into (-M/2, M/2]."""
    k = len(primes)
    digits = [np.asarray(residues[0], dtype=np.int64) % primes[0]]
    for i in range(1, k):
        p = primes[i]
        # v = (r_i - (d0 + d1 p0 + ...)) / (p0 ... p_{i-1}) mod p
        acc = np.zeros_like(digits[0])
        mult = 1
        for j in range(i):
            acc = (acc + digits[j] * (mult % p)) % p
            mult *= primes[j]
        inv = pow(mult % p, p - 2, p)
        digits.append((np.asarray(residues[i], dtype=np.int64) - acc) % p * inv % p)
    modulus = 1
    for p in primes:
        modulus *= p
    half = modulus // 2
    out = []
    cols = [d.tolist() for d in digits]
    for idx in range(len(cols[0])):
        v = 0
        for j in range(k - 1, -1, -1):
            v = v * primes[j] + cols[j][idx]
        out.append(v - modulus if v > half else v)
    return out
