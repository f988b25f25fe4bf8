"""Mellin transforms and the Voronoi integral transforms.

Conventions
-----------
For k = 0, 1 and a weight phi at scale Y,

    Phi_k(y)   = int_{(sigma)} (pi^3 y)^(-s) G_k(s; mu) phi~(-s - k) ds
    Omega_k(y) = 1/(2 pi i) int_{(sigma)} (pi^3 y)^(-s) G_k(s; 0) omega~(-s - k) ds

with G_k(s; mu) = prod_j Gamma((1 + s + mu_j + 2k)/2) / Gamma((-s - mu_j)/2), and
Phi^+- = Phi_0 +- Phi_1 / (i pi^3 y) (likewise Omega^+-). Writing
phi~(z) = Y^z w~(z) for the unit-scale shape w, the integrand depends on y only
through (pi^3 y Y)^(-s), so everything below works with x = y * Y.

Along s = sigma + i t the trapezoid rule with step h is used. For bulk
evaluation the same node set is summed with one FFT in u = log(pi^3 x),
followed by local Lagrange interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ContourError, ToleranceError, UnsupportedKernelError
from .special import bessel_j, log_gamma_array
from .weights import SmoothWeight

PI3 = math.pi**3


# -- parameter types --------------------------------------------------------


@dataclass(frozen=True)
class SpectralParams:
    kind: str = "gl3"
    mu: tuple = (0.0, 0.0, 0.0)
    k: int = 12
    maass_mu: float = 0.0

    def __post_init__(self):
        if self.kind == "gl3":
            mu = tuple(complex(m) for m in self.mu)
            object.__setattr__(self, "mu", mu)
            if len(mu) != 3 or abs(sum(mu)) > 1e-12:
                raise ValueError("GL(3) parameters must be three numbers summing to zero")
            if max(abs(m.real) for m in mu) > 0.5 - 0.1 + 1e-12:
                raise ValueError("|Re mu_j| exceeds 1/2 - 1/10")
        elif self.kind == "gl2_holomorphic":
            if self.k < 2 or self.k % 2:
                raise ValueError("holomorphic weight must be even and >= 2")
        elif self.kind != "gl2_maass":
            raise ValueError(f"unknown spectral kind {self.kind!r}")

    @classmethod
    def gl3(cls, mu1=0.0, mu2=0.0, mu3=None):
        if mu3 is None:
            mu3 = -(mu1 + mu2)
        return cls("gl3", (mu1, mu2, mu3))

    @classmethod
    def from_nu(cls, nu1, nu2):
        """Langlands parameters of a form of type (nu1, nu2); nu1 = nu2 = 1/3 gives mu = 0."""
        return cls.gl3(-nu1 - 2 * nu2 + 1, -nu1 + nu2, 2 * nu1 + nu2 - 1)

    @classmethod
    def holomorphic(cls, k=12):
        return cls("gl2_holomorphic", k=k)

    @classmethod
    def maass(cls, mu):
        return cls("gl2_maass", maass_mu=float(mu))


TRIVIAL_GL3 = SpectralParams.gl3()


@dataclass(frozen=True)
class ContourProfile:
    sigma: float | None = None  # None: flat-magnitude abscissa -1/2 - k
    truncation: float = 200.0
    nodes_per_unit: float = 20.0
    tol: float = 1e-11
    max_truncation: float = 2.0e5
    max_halvings: int = 6

    def __post_init__(self):
        if self.truncation <= 0 or self.nodes_per_unit <= 0 or self.tol <= 0:
            raise ValueError("contour profile values must be positive")


def sigma_floor(k: int, mu) -> float:
    return max(-1.0 - complex(m).real - 2 * k for m in mu)


def resolve_sigma(k: int, mu, profile: ContourProfile) -> float:
    floor = sigma_floor(k, mu)
    sigma = -0.5 - k if profile.sigma is None else profile.sigma
    if sigma <= floor:
        raise ContourError(f"sigma={sigma} outside the legal strip sigma > {floor} for k={k}")
    return sigma


# -- Mellin transforms ------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)


def _gl_panel(f, a, b):
    x = 0.5 * (a + b) + 0.5 * (b - a) * _GL_NODES
    return 0.5 * (b - a) * np.tensordot(_GL_WEIGHTS, f(x), axes=(0, 0))


def adaptive_gl(f, a: float, b: float, tol: float = 1e-13, init_panels: int = 8, max_panels: int = 200_000):
    """Adaptive composite Gauss-Legendre; ``f`` maps a node array to values (leading axis = nodes)."""
    edges = np.linspace(a, b, init_panels + 1)
    stack = list(zip(edges[:-1], edges[1:]))
    total = 0.0
    parts = []
    used = 0
    while stack:
        lo, hi = stack.pop()
        whole = _gl_panel(f, lo, hi)
        mid = 0.5 * (lo + hi)
        left, right = _gl_panel(f, lo, mid), _gl_panel(f, mid, hi)
        used += 3
        err = np.max(np.abs(whole - (left + right)))
        if err <= tol * (hi - lo) / (b - a) or hi - lo < 1e-12 * (b - a):
            parts.append(left + right)
        else:
            if used > max_panels:
                raise ToleranceError("adaptive quadrature did not converge")
            stack.append((lo, mid))
            stack.append((mid, hi))
    total = np.sum(parts, axis=0)
    return total


def _mellin_unit(weight: SmoothWeight, s: np.ndarray, tol: float) -> np.ndarray:
    lo, hi = weight.unit_support
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    width = np.log(hi / lo)
    osc = (np.max(np.abs(s.imag)) * width + 2 * math.pi * abs(weight.unit_twist) * (hi - lo)) / math.pi
    init = int(max(8, 4 * weight.derivative_bound, math.ceil(osc)))
    scale = max(1.0, float(np.max(np.abs(np.power(hi, s.real - 1.0)))))

    def f(x):
        wx = weight.unit_twisted(x) / weight.amplitude
        return wx[:, None] * np.power(x[:, None], s[None, :] - 1.0)

    return weight.amplitude * adaptive_gl(f, lo, hi, tol * scale, init_panels=init)


def mellin(weight: SmoothWeight, s, tol: float = 1e-13):
    """int_0^inf weight(u) u^(s-1) du, with the scale factored out as Y^s."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
    out = np.power(weight.scale, s_arr) * _mellin_unit(weight, s_arr, tol)
    return complex(out[0]) if np.ndim(s) == 0 else out


def log_moments(weight: SmoothWeight, tol: float = 1e-14) -> tuple[complex, complex, complex]:
    """(omega~(1), omega~'(1), omega~''(1)), i.e. int omega(u) (log u)^j du for j = 0, 1, 2."""
    lo, hi = weight.unit_support
    L = math.log(weight.scale)

    def f(x):
        w = weight.unit_twisted(x)
        lx = np.log(x)
        return np.stack([w, w * lx, w * lx * lx], axis=1)

    b0, b1, b2 = adaptive_gl(f, lo, hi, tol, init_panels=int(max(16, 8 * weight.derivative_bound)))
    Y = weight.scale
    vals = (Y * b0, Y * (b1 + L * b0), Y * (b2 + 2 * L * b1 + L * L * b0))
    return tuple(complex(v) if np.iscomplexobj(v) else float(v) for v in vals)


def mellin_line(weight: SmoothWeight, re: float, h: float, n: int) -> np.ndarray:
    """Unit-scale w~(re + i j h) for j = -n..n via one FFT in x = log u (trapezoid rule)."""
    lo, hi = weight.unit_support
    x0 = math.log(lo)
    T = n * h
    # the narrowest transition, measured in log u, sits at the top of the support
    trans_x = weight.transition_width / hi
    twist_freq = 2 * math.pi * abs(weight.unit_twist) * hi
    hx_target = min(trans_x / 200.0, math.pi / (2.0 * (T + twist_freq + 1.0)))
    nfft = 1
    while nfft < 2 * math.pi / (hx_target * h) or nfft < 2 * n + 1:
        nfft *= 2
    hx = 2 * math.pi / (nfft * h)
    x = x0 + np.arange(nfft) * hx
    f = np.zeros(nfft, dtype=complex)
    inside = x <= math.log(hi) + 1e-15
    u = np.exp(x[inside])
    f[inside] = weight.unit_twisted(u) * np.exp(re * x[inside])
    G = np.fft.ifft(f) * nfft * hx
    j = np.arange(-n, n + 1)
    return G[np.mod(j, nfft)] * np.exp(1j * j * h * x0)


# -- Mellin-Barnes contour integrals ---------------------------------------


def _gamma_ratio(s: np.ndarray, k: int, mu) -> np.ndarray:
    lg = np.zeros_like(s)
    for m in mu:
        lg = lg + log_gamma_array((1 + s + m + 2 * k) / 2) - log_gamma_array((-s - m) / 2)
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.exp(lg)
    return np.where(np.isfinite(lg.real) | (lg.real < 0), out, 0.0)


def line_integrand(k: int, mu, weight: SmoothWeight, sigma: float, h: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes s_j and F_j = G_k(s_j) w~(-s_j - k) with unit-scale w."""
    t = np.arange(-n, n + 1) * h
    s = sigma + 1j * t
    wt = mellin_line(weight, -sigma - k, h, n)[::-1]  # w~(-sigma - k - i t_j)
    return s, _gamma_ratio(s, k, mu) * wt


def _prefactor(normalized: bool) -> complex:
    # ds = i dt; the Omega family carries 1/(2 pi i)
    return 1.0 / (2 * math.pi) if normalized else 1j


@dataclass
class _LineCache:
    entries: dict = field(default_factory=dict)


_line_cache = _LineCache()


def _cached_line(k, mu, weight, sigma, h, n):
    key = (k, tuple(mu), weight, sigma, h, n)
    hit = _line_cache.entries.get(key)
    if hit is None:
        if len(_line_cache.entries) > 32:
            _line_cache.entries.clear()
        hit = line_integrand(k, mu, weight, sigma, h, n)
        _line_cache.entries[key] = hit
    return hit


def _sum_line(s, F, x, h):
    L = math.log(PI3 * x)
    terms = np.exp(-s * L) * F
    return h * terms.sum(), h * np.abs(terms).sum()


def contour_integral(k: int, y: float, mu, weight: SmoothWeight, profile: ContourProfile, normalized: bool) -> complex:
    """Phi_k(y) (normalized=False) or Omega_k(y) (normalized=True, mu = 0) by adaptive trapezoid."""
    if y <= 0:
        raise ValueError("y must be positive")
    sigma = resolve_sigma(k, mu, profile)
    x = y * weight.scale
    h = 1.0 / profile.nodes_per_unit
    s, F, n = _settle_truncation(k, mu, weight, sigma, h, profile.truncation, profile.tol, profile.max_truncation)
    T = n * h
    prev, scale = _sum_line(s, F, x, h)
    for _ in range(profile.max_halvings):
        h /= 2
        n = int(math.ceil(T / h))
        s, F = _cached_line(k, mu, weight, sigma, h, n)
        cur, scale = _sum_line(s, F, x, h)
        if abs(cur - prev) <= profile.tol * max(scale, 1e-300):
            return complex(_prefactor(normalized) * cur * weight.scale ** (-k))
        prev = cur
    raise ToleranceError("trapezoid halving did not converge")


def phi_k(k: int, y: float, params: SpectralParams, weight: SmoothWeight, profile: ContourProfile = ContourProfile()):
    return contour_integral(k, y, params.mu, weight, profile, normalized=False)


def omega_k(k: int, y: float, weight: SmoothWeight, profile: ContourProfile = ContourProfile()):
    return contour_integral(k, y, (0.0, 0.0, 0.0), weight, profile, normalized=True)


def _combine_pm(v0, v1, y):
    c = 1.0 / (1j * PI3 * y)
    return v0 + c * v1, v0 - c * v1


def phi_pm(y: float, params: SpectralParams, weight: SmoothWeight, profile: ContourProfile = ContourProfile()):
    """(Phi^+(y), Phi^-(y))."""
    if params.kind != "gl3":
        raise ValueError("phi_pm needs GL(3) parameters")
    return _combine_pm(phi_k(0, y, params, weight, profile), phi_k(1, y, params, weight, profile), y)


def omega_pm(y: float, weight: SmoothWeight, profile: ContourProfile = ContourProfile()):
    """(Omega^+(y), Omega^-(y))."""
    return _combine_pm(omega_k(0, y, weight, profile), omega_k(1, y, weight, profile), y)


def _settle_truncation(k, mu, weight, sigma, h, T, tol, max_T):
    """Double |Im s| until the integrand has died out at both ends.

    Off the flat abscissa the numerical Mellin noise floor is amplified by the
    growing gamma ratio; once the edge magnitude stops shrinking the previous
    truncation is kept.
    """
    best = None
    while True:
        n = int(math.ceil(T / h))
        s, F = _cached_line(k, mu, weight, sigma, h, n)
        mag = np.abs(F)
        tail = max(1, n // 10)
        edge = max(mag[:tail].max(), mag[-tail:].max())
        if edge <= tol * mag.max() * 1e-2:
            return s, F, n
        if best is not None and edge > 0.25 * best[3]:
            return best[:3]
        best = (s, F, n, edge)
        T *= 2
        if T > max_T:
            raise ToleranceError(f"integrand not decayed by |Im s| = {max_T}")


class ContourTable:
    """Bulk evaluator of Phi_k or Omega_k on many y via FFT over the trapezoid nodes."""

    def __init__(self, k: int, weight: SmoothWeight, mu=(0.0, 0.0, 0.0), normalized: bool = True,
                 profile: ContourProfile = ContourProfile(), pad: int = 16, order: int = 10):
        self.k, self.weight, self.mu, self.normalized = k, weight, tuple(mu), normalized
        self.profile = profile
        self.sigma = resolve_sigma(k, mu, profile)
        self.h = h = 1.0 / profile.nodes_per_unit
        s, F, n = _settle_truncation(k, mu, weight, self.sigma, h, profile.truncation, profile.tol,
                                     profile.max_truncation)
        nf = 1
        while nf < pad * len(F):
            nf *= 2
        self.du = 2 * math.pi / (nf * h)
        buf = np.zeros(nf, dtype=complex)
        buf[: len(F)] = F
        g = np.fft.fft(buf)
        l = np.arange(nf)
        l = np.where(l < nf // 2, l, l - nf)
        u = l * self.du
        # sum_j F_j exp(-i t_j u) with t_j = (j - n) h
        g = g * np.exp(1j * n * h * u)
        order_idx = np.argsort(u)
        self.u0 = u[order_idx][0]
        self.g = g[order_idx]
        self.order = order
        self.u_limit = math.pi / h - 2.0
        self.scale_factor = _prefactor(normalized) * h * weight.scale ** (-k)

    def __call__(self, y) -> np.ndarray:
        y = np.atleast_1d(np.asarray(y, dtype=float))
        u = np.log(PI3 * y * self.weight.scale)
        if np.any(np.abs(u) > self.u_limit):
            raise ValueError("y outside the table's reliable range")
        pos = (u - self.u0) / self.du
        p = self.order
        i0 = np.floor(pos).astype(np.int64) - p // 2 + 1
        out = np.zeros(len(y), dtype=complex)
        frac = pos - i0
        for j in range(p):
            w = np.ones(len(y))
            for m in range(p):
                if m != j:
                    w *= (frac - m) / (j - m)
            out += w * self.g[i0 + j]
        return out * np.exp(-self.sigma * u) * self.scale_factor


class PmTable:
    """Phi^+- or Omega^+- on many y from a pair of :class:`ContourTable`."""

    def __init__(self, weight: SmoothWeight, mu=(0.0, 0.0, 0.0), normalized=True, profile=ContourProfile()):
        self.t0 = ContourTable(0, weight, mu, normalized, profile)
        self.t1 = ContourTable(1, weight, mu, normalized, profile)

    def __call__(self, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return _combine_pm(self.t0(y), self.t1(y), y)


# -- GL(2) kernels ------------------------------------------------------------


def _gl_nodes(a: float, b: float, panels: int) -> tuple[np.ndarray, np.ndarray]:
    g, wg = np.polynomial.legendre.leggauss(16)
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    return (mid + half * g).ravel(), (half * wg).ravel()


def _k_imag_order(nu: float, z: np.ndarray) -> np.ndarray:
    """K_{i nu}(z) = int_0^inf exp(-z cosh t) cos(nu t) dt."""
    tmax = math.acosh(max(1.0, 40.0 / max(float(np.min(z)), 1e-3)) + 1.0) + 1.0
    t, w = _gl_nodes(0.0, tmax, 64)
    return (np.exp(-np.outer(z, np.cosh(t))) * np.cos(nu * t) * w).sum(axis=1)


def _ysum_imag_order(nu: float, z: np.ndarray) -> np.ndarray:
    """Y_{i nu}(z) + Y_{-i nu}(z) from Schlafli's integral representation."""
    th, wth = _gl_nodes(0.0, math.pi, 64 + int(np.max(z)))
    first = (np.sin(np.outer(z, np.sin(th))) * np.cosh(nu * th) * wth).sum(axis=1) * (2 / math.pi)
    tmax = math.asinh(40.0 / max(float(np.min(z)), 1e-3)) + 1.0
    t, wt = _gl_nodes(0.0, tmax, 64)
    second = (np.exp(-np.outer(z, np.sinh(t))) * np.cos(nu * t) * wt).sum(axis=1)
    return first - (2 / math.pi) * (1 + math.cosh(nu * math.pi)) * second


def _psi_panels(weight: SmoothWeight, xmax: float) -> int:
    lo, hi = weight.unit_support
    osc = 2 * math.sqrt(xmax) * (math.sqrt(hi) - math.sqrt(lo)) + abs(weight.unit_twist) * (hi - lo)
    return int(max(8 * weight.derivative_bound, osc, 32))


def psi_pm(y, params: SpectralParams, weight: SmoothWeight, maass_enabled: bool = False, panels: int | None = None):
    """(Psi^+(y), Psi^-(y)) for array or scalar y >= 0.

    Holomorphic weight k: Psi^- = 2 pi i^k int psi(v) J_{k-1}(4 pi sqrt(y v)) dv and
    Psi^+ = 0 (it multiplies the absent coefficients a_g(-m)).
    """
    scalar = np.ndim(y) == 0
    y = np.atleast_1d(np.asarray(y, dtype=float))
    lo, hi = weight.unit_support
    Y = weight.scale
    if params.kind == "gl2_maass" and not maass_enabled:
        raise UnsupportedKernelError("Maass kernels are disabled (set maass_kernels=True)")
    if params.kind not in ("gl2_holomorphic", "gl2_maass"):
        raise ValueError("psi_pm needs GL(2) parameters")
    plus = np.zeros(len(y), dtype=complex)
    minus = np.zeros(len(y), dtype=complex)
    order = np.argsort(y)
    chunk = 128
    for start in range(0, len(y), chunk):
        idx = order[start : start + chunk]
        yy = y[idx]
        npan = panels or _psi_panels(weight, float(yy.max()) * Y)
        u, w = _gl_nodes(lo, hi, npan)
        wu = weight.unit_twisted(u) * w * Y
        z = 4 * math.pi * np.sqrt(np.outer(yy * Y, u))
        if params.kind == "gl2_holomorphic":
            minus[idx] = 2 * math.pi * (1j**params.k).real * (bessel_j(params.k - 1, z) @ wu)
        else:
            nu = 2 * params.maass_mu
            zf = z.ravel()
            safe = np.maximum(zf, 1e-12)
            kv = _k_imag_order(nu, safe).reshape(z.shape)
            ys = _ysum_imag_order(nu, safe).reshape(z.shape)
            ch = math.cosh(math.pi * params.maass_mu)
            plus[idx] = 4 * ch * (kv @ wu)
            minus[idx] = -(math.pi / ch) * (ys @ wu)
    if scalar:
        return complex(plus[0]), complex(minus[0])
    return plus, minus


# -- truncation windows -------------------------------------------------------


def dual_cutoff(q: int, Y: float, P: float = 1.0, kind: str = "gl3", eps: float = 0.1, safety: float = 10.0,
                delta: float | None = None, exact: bool = False):
    """Truncation index for dual sums from the negligibility windows.

    kind="gl3":   n1^2 n2 <= safety * Y^eps * P^3 * q^3 / Y   (P: unit-scale derivative bound)
    kind="delta": n^2 l   <= safety * q^3 * delta^3 * (qY)^eps / Y
    kind="gl2":   m      <= safety * q^2 * Y^eps * P^2 / Y
    ``exact=True`` returns the real-valued bound before rounding up.
    """
    if q < 1 or Y <= 0 or P <= 0:
        raise ValueError("positive inputs required")
    if kind == "gl3":
        val = safety * Y**eps * P**3 * q**3 / Y
    elif kind == "delta":
        d = P if delta is None else delta
        val = safety * q**3 * d**3 * (q * Y) ** eps / Y
    elif kind == "gl2":
        val = safety * q**2 * Y**eps * P**2 / Y
    else:
        raise ValueError(f"unknown window kind {kind!r}")
    return val if exact else max(1, math.ceil(val))


def kernel_extent(fn, x0: float, tol: float, growth: float = 2 ** 0.25, run: int = 12, x_max: float = 1e9) -> float:
    """Smallest x beyond which |fn(x)| stays below tol * peak on a geometric grid.

    ``fn`` maps an array of x = y*Y values to kernel magnitudes.
    """
    xs = x0 * growth ** np.arange(0, 400)
    xs = xs[xs <= x_max]
    vals = np.abs(fn(xs))
    peak = vals.max()
    below = vals <= tol * peak
    for i in range(len(xs) - run):
        if below[i : i + run].all() and below[i:].all():
            return float(xs[i])
    if below[-run:].all():
        return float(xs[-run])
    return float(xs[-1])


@lru_cache(maxsize=16)
def pm_table(weight: SmoothWeight, normalized: bool = True, mu=(0.0, 0.0, 0.0)) -> PmTable:
    return PmTable(weight, mu, normalized)
