"""Cusp-form coefficient tables.

The concrete GL(2) form is the discriminant Delta = q prod (1 - q^n)^24 of
weight 12, whose coefficients tau(n) are computed exactly. GL(3)-type
coefficients enter only through the :class:`CoefficientOracle` interface.
"""

from __future__ import annotations

import math
import random
import struct
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import arith
from .errors import CacheChecksumError, CacheVersionError, CapacityError
from .ntt import crt_signed, ntt_primes, square_mod

TAU_EXPONENT = Fraction(11, 2)


@dataclass(frozen=True, eq=False)
class CoefficientTable:
    """Values lambda(n), 1 <= n <= limit; index 0 of each array is a placeholder."""

    label: str
    limit: int
    exact_values: list[int] | None = None
    normalized_values: np.ndarray | None = None
    normalization_exponent: Fraction = Fraction(0)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.exact_values is not None and len(self.exact_values) != self.limit + 1:
            raise ValueError("exact_values must have length limit + 1")
        if self.normalized_values is not None:
            if len(self.normalized_values) != self.limit + 1:
                raise ValueError("normalized_values must have length limit + 1")
            self.normalized_values.setflags(write=False)

    def __eq__(self, other):
        if not isinstance(other, CoefficientTable):
            return NotImplemented
        same_norm = (self.normalized_values is None) == (other.normalized_values is None)
        if same_norm and self.normalized_values is not None:
            same_norm = self.normalized_values.tobytes() == other.normalized_values.tobytes()
        return (
            self.label == other.label
            and self.limit == other.limit
            and self.exact_values == other.exact_values
            and self.normalization_exponent == other.normalization_exponent
            and same_norm
        )

    def values(self) -> np.ndarray:
        """Float view: normalized values when present, otherwise the exact ones."""
        if self.normalized_values is not None:
            return self.normalized_values
        return np.array([float(v) for v in self.exact_values])

    def prefix(self, n: int) -> "CoefficientTable":
        n = min(n, self.limit)
        return replace(
            self,
            limit=n,
            exact_values=None if self.exact_values is None else self.exact_values[: n + 1],
            normalized_values=None if self.normalized_values is None else self.normalized_values[: n + 1].copy(),
        )


# -- tau via eta products ---------------------------------------------------


def eta_cubed_series(N: int) -> np.ndarray:
    """Coefficients of prod (1 - q^n)^3 up to q^(N-1), by Jacobi's identity."""
    out = np.zeros(N, dtype=np.int64)
    k = 0
    while k * (k + 1) // 2 < N:
        out[k * (k + 1) // 2] = (-1) ** k * (2 * k + 1)
        k += 1
    return out


def _primes_needed(N: int) -> list[int]:
    # |tau(n)| <= d(n) n^{11/2} <= 2 sqrt(N) N^6; keep 16 bits of margin
    bound_bits = math.log2(2.0 * N**6 * 2.0 * math.sqrt(N)) + 16
    primes, bits = [], 0.0
    for p in ntt_primes():
        primes.append(p)
        bits += math.log2(p)
        if bits > bound_bits:
            return primes
    raise CapacityError(f"not enough NTT primes for N={N}")


def _deligne_ok(t: int, p: int) -> bool:
    return t * t <= 4 * p**11


def build_tau_table(N: int, budget: int = arith.DEFAULT_MEMORY_BUDGET) -> CoefficientTable:
    """Exact tau(n) for n <= N."""
    if N < 1:
        raise ValueError("N must be positive")
    if N > budget or 2 * N > (1 << 23):
        raise CapacityError(f"tau table of size {N} exceeds capacity")
    base = eta_cubed_series(N)  # Delta/q = (eta^3)^8 truncated to degree N-1
    primes = _primes_needed(N)
    residues = []
    for p in primes:
        a = base % p
        for _ in range(3):
            a = square_mod(a, p, N)
        residues.append(a)
    coeffs = crt_signed(residues, primes)
    exact = [0] + coeffs  # shift: Delta starts at q^1
    for p in arith.prime_list(2, N):
        if not _deligne_ok(exact[p], p):
            raise ArithmeticError(f"reconstructed tau({p}) = {exact[p]} violates the Deligne bound")
    return CoefficientTable("tau", N, exact_values=exact, meta={"moduli": len(primes)})


@dataclass(frozen=True)
class HeckeReport:
    passed: bool
    checks: int
    counterexample: tuple | None = None


def hecke_validate(table: CoefficientTable, pairs: int = 100, seed: int = 0) -> HeckeReport:
    """Multiplicativity on random coprime pairs and tau(p^2) = tau(p)^2 - p^11."""
    if table.exact_values is None:
        raise ValueError("hecke_validate needs exact values")
    t = table.exact_values
    N = table.limit
    checks = 0
    for p in arith.prime_list(2, math.isqrt(N)):
        checks += 1
        if t[p * p] != t[p] ** 2 - p**11:
            return HeckeReport(False, checks, ("p^2", p, p * p))
    rng = random.Random(seed)
    if N >= 6:
        tries = 0
        done = 0
        while done < pairs and tries < 100 * pairs:
            tries += 1
            m = rng.randint(2, max(2, math.isqrt(N)))
            n = rng.randint(2, N // m)
            if math.gcd(m, n) != 1 or m * n > N:
                continue
            done += 1
            checks += 1
            if t[m * n] != t[m] * t[n]:
                return HeckeReport(False, checks, ("mult", m, n, m * n))
    return HeckeReport(True, checks)


def normalize(table: CoefficientTable, exponent: Fraction | float | int) -> CoefficientTable:
    if table.exact_values is None:
        raise ValueError("normalize needs exact values")
    exponent = Fraction(exponent).limit_denominator(10**6)
    ex = float(exponent)
    vals = np.zeros(table.limit + 1)
    for n in range(1, table.limit + 1):
        vals[n] = float(table.exact_values[n]) * n ** (-ex) if ex else float(table.exact_values[n])
    return replace(table, normalized_values=vals, normalization_exponent=exponent)


def from_sieve(label: str, values: np.ndarray) -> CoefficientTable:
    N = len(values) - 1
    exact = [int(v) for v in values]
    exact[0] = 0
    return CoefficientTable(label, N, exact_values=exact, normalized_values=np.asarray(values, dtype=float).copy())


def synthetic_table(label: str, values: np.ndarray) -> CoefficientTable:
    """Float-only table, e.g. a point mass for single-term checks."""
    vals = np.asarray(values, dtype=float).copy()
    vals[0] = 0.0
    return CoefficientTable(label, len(vals) - 1, normalized_values=vals)


# -- coefficient oracles ----------------------------------------------------


class CoefficientOracle:
    """Deterministic on-demand source of lambda(n) and dual coefficients A(n2, n1)."""

    def __call__(self, n: int) -> float:
        raise NotImplementedError

    def dual(self, n2: int, n1: int) -> float:
        raise NotImplementedError


class ZeroOracle(CoefficientOracle):
    def __call__(self, n):
        return 0.0

    def dual(self, n2, n1):
        return 0.0


class D3Oracle(CoefficientOracle):
    """Divisor-function coefficients.

    ``dual(n2, n1)`` is the weight that multiplies the (n1, n2) Kloosterman term
    in the d3 Voronoi formula: sum over a | n1, b | n1/a of sigma00(n1/(ab), n2).
    """

    def __call__(self, n):
        return float(sum(arith.divisor_count(d) for d in arith.divisors(n)))

    def dual(self, n2, n1):
        return float(
            sum(arith.sigma00(n1 // (a * b), n2) for a in arith.divisors(n1) for b in arith.divisors(n1 // a))
        )


class TableOracle(CoefficientOracle):
    def __init__(self, table: CoefficientTable, dual_fn=None):
        self._vals = table.values()
        self._dual = dual_fn

    def __call__(self, n):
        return float(self._vals[n])

    def dual(self, n2, n1):
        if self._dual is None:
            raise KeyError("table oracle has no dual coefficients")
        return float(self._dual(n2, n1))


# -- binary cache -----------------------------------------------------------

MAGIC = b"SCS1"
FORMAT_VERSION = 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK64
    return h


def _encode_int(v: int) -> bytes:
    mag = abs(v)
    limbs = []
    while mag:
        limbs.append(mag & _MASK64)
        mag >>= 64
    return struct.pack("<BH", 1 if v < 0 else 0, len(limbs)) + struct.pack(f"<{len(limbs)}Q", *limbs)


def cache_store(table: CoefficientTable, path: str | Path) -> Path:
    path = Path(path)
    label = table.label.encode("utf-8")
    flags = (1 if table.exact_values is not None else 0) | (2 if table.normalized_values is not None else 0)
    exp = table.normalization_exponent
    parts = [
        MAGIC,
        struct.pack("<H", FORMAT_VERSION),
        struct.pack("<H", len(label)),
        label,
        struct.pack("<QB", table.limit, flags),
        struct.pack("<qq", exp.numerator, exp.denominator),
    ]
    if table.exact_values is not None:
        parts.extend(_encode_int(v) for v in table.exact_values)
    if table.normalized_values is not None:
        parts.append(np.asarray(table.normalized_values, dtype="<f8").tobytes())
    payload = b"".join(parts)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(payload + struct.pack("<Q", fnv1a64(payload)))
    return path


def cache_load(path: str | Path) -> CoefficientTable:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise CacheVersionError(f"bad magic {raw[:4]!r}")
    if len(raw) < 6 or struct.unpack_from("<H", raw, 4)[0] != FORMAT_VERSION:
        raise CacheVersionError("unsupported cache format version")
    if len(raw) < 14:
        raise CacheChecksumError("cache file truncated")
    payload, (stored,) = raw[:-8], struct.unpack("<Q", raw[-8:])
    if fnv1a64(payload) != stored:
        raise CacheChecksumError("cache checksum mismatch")
    off = 6
    (llen,) = struct.unpack_from("<H", payload, off)
    off += 2
    label = payload[off : off + llen].decode("utf-8")
    off += llen
    N, flags = struct.unpack_from("<QB", payload, off)
    off += 9
    num, den = struct.unpack_from("<qq", payload, off)
    off += 16
    exact = None
    if flags & 1:
        exact = []
        for _ in range(N + 1):
            sign, nl = struct.unpack_from("<BH", payload, off)
            off += 3
            limbs = struct.unpack_from(f"<{nl}Q", payload, off)
            off += 8 * nl
            mag = 0
            for limb in reversed(limbs):
                mag = (mag << 64) | limb
            exact.append(-mag if sign else mag)
    norm = None
    if flags & 2:
        norm = np.frombuffer(payload, dtype="<f8", count=N + 1, offset=off).astype(np.float64)
        off += 8 * (N + 1)
    if off != len(payload):
        raise CacheChecksumError("trailing bytes in cache payload")
    return CoefficientTable(label, N, exact, norm, Fraction(num, den))


def tau_table_cached(N: int, cache_dir: str | Path | None = None, budget: int = arith.DEFAULT_MEMORY_BUDGET):
    """Normalized tau table, loaded from or written to ``cache_dir`` when given."""
    if cache_dir is not None:
        path = Path(cache_dir) / f"tau_{N}.scs"
        if path.exists():
            return cache_load(path)
    table = normalize(build_tau_table(N, budget), TAU_EXPONENT)
    if cache_dir is not None:
        cache_store(table, path)
    return table


def d3_table_cached(N: int, cache_dir: str | Path | None = None, budget: int = arith.DEFAULT_MEMORY_BUDGET):
    """d3 table, loaded from or written to ``cache_dir`` when given."""
    if cache_dir is not None:
        path = Path(cache_dir) / f"d3_{N}.scs"
        if path.exists():
            return cache_load(path)
    table = from_sieve("d3", arith.sieve_d3(N, budget).values)
    if cache_dir is not None:
        cache_store(table, path)
    return table
