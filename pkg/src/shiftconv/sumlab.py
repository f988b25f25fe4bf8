"""Direct evaluation of averaged shifted convolution sums and the experiments built on them.

    S(H, X) = (1/H) sum_h W(h/H) sum_n lambda(n) a(rn + h) V(n/X)

The inner n-sum for each h is a pairwise numpy sum over a fixed array; the
outer h-sum is accumulated with math.fsum over per-h values in h order, so the
result does not depend on how the h-range is split across threads.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .coeffs import CoefficientTable
from .errors import BudgetError, RangeNotCoveredError
from .weights import SmoothWeight, plateau, simple_bump

SMOOTHINGS = ("smooth", "sharp_dyadic")
DELTA_READINGS = ("printed", "seven_theta_over_twelve")
H_BLOCK = 64
DEFAULT_OP_BUDGET = 2e9


@dataclass(frozen=True)
class SumSpec:
    lam: CoefficientTable
    g: CoefficientTable
    r: int = 1
    X: float = 4096.0
    H: float = 64.0
    V: SmoothWeight = field(default_factory=simple_bump)
    W: SmoothWeight = field(default_factory=simple_bump)
    U: SmoothWeight | None = None
    smoothing: str = "smooth"

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("r must be at least 1")
        if not (0 < self.H <= self.X):
            raise ValueError("need 0 < H <= X")
        if self.smoothing not in SMOOTHINGS:
            raise ValueError(f"smoothing must be one of {SMOOTHINGS}")

    def h_range(self) -> np.ndarray:
        lo, hi = self.W.unit_support
        return np.arange(max(1, math.ceil(lo * self.H)), math.floor(hi * self.H) + 1)

    def n_range(self) -> np.ndarray:
        lo, hi = self.V.unit_support
        return np.arange(max(1, math.ceil(lo * self.X)), math.floor(hi * self.X) + 1)


def _check_coverage(spec: SumSpec, n: np.ndarray, h: np.ndarray, budget: float):
    if len(n) == 0 or len(h) == 0:
        return
    if n[-1] > spec.lam.limit:
        raise RangeNotCoveredError(f"lambda table stops at {spec.lam.limit}, need {n[-1]}")
    need = spec.r * int(n[-1]) + int(h[-1])
    if need > spec.g.limit:
        raise RangeNotCoveredError(f"a_g table stops at {spec.g.limit}, need {need}")
    if len(n) * len(h) > budget:
        raise BudgetError(f"{len(n) * len(h):.3g} operations exceed the budget {budget:.3g}")


def _per_h(lam_w: np.ndarray, a: np.ndarray, r: int, n: np.ndarray, hs: np.ndarray) -> list[float]:
    base = r * n
    return [float(np.sum(lam_w * a[base + h])) for h in hs]


def _weighted_h_sum(spec: SumSpec, n: np.ndarray, lam_w: np.ndarray, a: np.ndarray, threads: int) -> float:
    hs = spec.h_range()
    blocks = [hs[i : i + H_BLOCK] for i in range(0, len(hs), H_BLOCK)]
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda b: _per_h(lam_w, a, spec.r, n, b), blocks))
    else:
        parts = [_per_h(lam_w, a, spec.r, n, b) for b in blocks]
    inner = [v for p in parts for v in p]
    wh = spec.W.unit_twisted(hs / spec.H)
    return math.fsum(float(w) * v for w, v in zip(wh, inner)) / spec.H


def direct_sum(spec: SumSpec, threads: int = 1, budget: float = DEFAULT_OP_BUDGET, absolute: bool = False) -> float:
    """S(H, X) by the direct double loop; ``absolute=True`` sums |lambda| |a| instead (the trivial majorant)."""
    n = spec.n_range()
    h = spec.h_range()
    _check_coverage(spec, n, h, budget)
    lam = spec.lam.values()
    a = spec.g.values()
    if absolute:
        lam, a = np.abs(lam), np.abs(a)
    lam_w = lam[n] * spec.V.unit(n / spec.X)
    return _weighted_h_sum(spec, n, lam_w, a, threads)


def shifted_sum(spec: SumSpec, h: int) -> float:
    """D_h(X) = sum_n lambda(n) a(rn + h) V(n/X) for a single shift."""
    n = spec.n_range()
    _check_coverage(spec, n, np.array([h]), DEFAULT_OP_BUDGET)
    lam_w = spec.lam.values()[n] * spec.V.unit(n / spec.X)
    return float(np.sum(lam_w * spec.g.values()[spec.r * n + h]))


def window_sum(spec: SumSpec, lo: int, hi: int, threads: int = 1, budget: float = DEFAULT_OP_BUDGET) -> float:
    """(1/H) sum_h W(h/H) sum_{lo < n <= hi} lambda(n) a(rn + h)."""
    n = np.arange(lo + 1, hi + 1)
    _check_coverage(spec, n, spec.h_range(), budget)
    lam_w = spec.lam.values()[n].astype(float)
    return _weighted_h_sum(spec, n, lam_w, spec.g.values(), threads)


class SharpComparison(NamedTuple):
    sharp: float
    smooth: float
    difference: float
    scale: float  # Y / Delta


def sharp_sum(spec: SumSpec, delta: float = 8.0, threads: int = 1, budget: float = DEFAULT_OP_BUDGET) -> SharpComparison:
    """T#(H, Y) over Y < n <= 2Y (Y = spec.X) against the U-smoothed T(H, Y)."""
    Y = spec.X
    sharp = window_sum(spec, int(math.floor(Y)), int(math.floor(2 * Y)), threads, budget)
    U = spec.U or plateau(delta)
    smooth = direct_sum(SumSpec(spec.lam, spec.g, spec.r, Y, spec.H, U, spec.W), threads, budget)
    return SharpComparison(sharp, smooth, abs(sharp - smooth), Y / U.derivative_bound)


def dyadic_windows(X: int) -> list[tuple[int, int]]:
    """(lo, hi] windows (X/2^(l+1), X/2^l] covering 0 < n <= X."""
    out = []
    hi = X
    while hi >= 1:
        lo = hi // 2
        out.append((lo, hi))
        hi = lo
    return out


# -- parameter presets ------------------------------------------------------------


@dataclass(frozen=True)
class Presets:
    Q: float
    eta: float
    P: float
    P_sharp: float
    Delta: float
    Q_sharp: float
    H_min_smooth: float
    H_min_sharp: float
    H_large: float
    delta_reading: str


def sharp_delta(X: float, H: float, r: int, theta: float, reading: str = "printed") -> float:
    """The smoothing parameter Delta of the sharp-cutoff argument.

    "printed": (HX)^(1/6) (rX)^(7/(12 theta)) (r^2 X)^(-5/24); at theta = 0 the
    middle factor is dropped. "seven_theta_over_twelve": exponent 7 theta / 12,
    the value that balances the two error terms.
    """
    if reading not in DELTA_READINGS:
        raise ValueError(f"reading must be one of {DELTA_READINGS}")
    base = (H * X) ** (1 / 6) * (r * r * X) ** (-5 / 24)
    if reading == "seven_theta_over_twelve":
        return base * (r * X) ** (7 * theta / 12)
    if theta == 0:
        return base
    return base * (r * X) ** (7 / (12 * theta))


def presets(X: float, H: float, r: int = 1, theta: float = 0.0, delta: float = 0.0, eps: float = 0.0,
            delta_reading: str = "printed", Y: float | None = None) -> Presets:
    if X <= 0 or H <= 0 or r < 1:
        raise ValueError("positive inputs required")
    Y = X if Y is None else Y
    D = sharp_delta(X, H, r, theta, delta_reading)
    return Presets(
        Q=(r * H) ** (2 / 7) * X ** (3 / 7),
        eta=1.0 / (r * X + H),
        P=math.sqrt(6 * r * X),
        P_sharp=math.sqrt(4 * r * Y + 2 * H),
        Delta=D,
        Q_sharp=(r * H) ** (2 / 7) * X ** (3 / 7) * D ** (-5 / 7),
        H_min_smooth=r**2.5 * X ** (0.25 + 3.5 * delta),
        H_min_sharp=r**2.5 * X ** (0.25 + 6 * delta) * (r * X) ** (2.5 * theta),
        H_large=(r * X) ** (0.5 + eps),
        delta_reading=delta_reading,
    )


def sharp_error_terms(X: float, H: float, r: int, theta: float, Delta: float) -> tuple[float, float]:
    """The two competing terms (rH Delta)^(5/7) X^(15/14) / H and X (rX)^theta / Delta."""
    return (r * H * Delta) ** (5 / 7) * X ** (15 / 14) / H, X * (r * X) ** theta / Delta


# -- fitting ------------------------------------------------------------------------


class ExponentFit(NamedTuple):
    slope: float
    intercept: float
    residual: float


def exponent_fit(points: Sequence[tuple[float, float]]) -> ExponentFit:
    """Least squares of log(value) against log(X); residual is the RMS misfit."""
    if len(points) < 3:
        raise ValueError("need at least 3 points")
    xs = np.array([p[0] for p in points], dtype=float)
    vs = np.array([p[1] for p in points], dtype=float)
    if np.any(vs <= 0) or np.any(xs <= 0):
        raise ValueError("values must be positive")
    lx, lv = np.log(xs), np.log(vs)
    A = np.vstack([lx, np.ones_like(lx)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, lv, rcond=None)
    res = lv - (slope * lx + icpt)
    return ExponentFit(float(slope), float(icpt), float(np.sqrt(np.mean(res**2))))


# -- smooth sums of a single sequence ------------------------------------------------


class BookerFit(NamedTuple):
    slope: float | None
    sums: tuple[float, ...]
    floors: tuple[float, ...]
    status: str  # "fitted" or "noise_floor"

    @property
    def passed(self) -> bool:
        return self.status == "noise_floor" or (self.slope is not None and self.slope <= -2)


def smooth_sum(values: np.ndarray, F: SmoothWeight, X: float) -> tuple[float, float]:
    """(sum lambda(n) F(n/X), rounding floor) with compensated summation."""
    lo, hi = F.unit_support
    n = np.arange(max(1, math.ceil(lo * X)), math.floor(hi * X) + 1)
    if n[-1] >= len(values):
        raise RangeNotCoveredError(f"table stops at {len(values) - 1}, need {n[-1]}")
    terms = values[n] * F.unit(n / X)
    mass = math.fsum(np.abs(terms))
    return math.fsum(terms), 64 * np.finfo(float).eps * mass


def booker_decay(coeffs: CoefficientTable, F: SmoothWeight, Xs: Sequence[float] | None = None) -> BookerFit:
    """Slope of log |sum lambda(n) F(n/X)| against log X.

    Sums at or below the rounding floor (64 ulp of the absolute mass) carry no
    information; they are dropped from the fit, and if fewer than three
    informative points remain the sequence is reported as decayed to the floor.
    """
    Xs = [2.0**k for k in range(10, 18)] if Xs is None else list(Xs)
    vals = coeffs.values()
    sums, floors = zip(*(smooth_sum(vals, F, X) for X in Xs))
    pts = [(X, abs(s)) for X, s, f in zip(Xs, sums, floors) if abs(s) > f]
    if len(pts) < 3:
        return BookerFit(None, tuple(sums), tuple(floors), "noise_floor")
    return BookerFit(exponent_fit(pts).slope, tuple(sums), tuple(floors), "fitted")


# -- experiments ------------------------------------------------------------------------


CSV_COLUMNS = ("X", "H", "r", "lambda", "sum_value", "trivial_sum", "ratio")


@dataclass(frozen=True)
class GridPoint:
    X: float
    H: float
    r: int
    law: float | None = None


class PointResult(NamedTuple):
    X: float
    H: float
    r: int
    lam: str
    value: float
    trivial: float
    law: float | None

    @property
    def ratio(self) -> float:
        return abs(self.value) / self.trivial if self.trivial else 0.0


@dataclass
class ExperimentReport:
    points: list[PointResult]
    fits: dict[float, ExponentFit]
    grid_hash: str
    csv_path: Path | None = None
    svg_path: Path | None = None

    @property
    def majorant_holds(self) -> bool:
        return all(abs(p.value) <= p.trivial for p in self.points)


def grid_from_laws(Xs: Sequence[float], laws: Sequence[float], r: int = 1) -> list[GridPoint]:
    return [GridPoint(float(X), float(round(X**law)), r, law) for law in laws for X in Xs]


def parse_grid_text(text: str) -> tuple[list[GridPoint], str]:
    """Grid file: key = value lines with keys X (list), H_law (list), r, lambda; '#' comments."""
    kv = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"malformed grid line: {raw!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        kv[k] = v
    try:
        Xs = [float(eval_power(x)) for x in kv["X"].split(",")]
        laws = [float(x) for x in kv["H_law"].split(",")]
    except KeyError as exc:
        raise ValueError(f"grid file lacks key {exc}") from None
    r = int(kv.get("r", "1"))
    return grid_from_laws(Xs, laws, r), kv.get("lambda", "d3")


def eval_power(tok: str) -> float:
    """Parse '4096' or '2^12'."""
    tok = tok.strip()
    if "^" in tok:
        b, e = tok.split("^", 1)
        return float(b) ** float(e)
    return float(tok)


def grid_hash(points: Sequence[GridPoint], lam: str) -> str:
    text = lam + ";" + ";".join(f"{p.X!r},{p.H!r},{p.r},{p.law!r}" for p in points)
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def run_experiment(points: Sequence[GridPoint], lam: CoefficientTable, g: CoefficientTable,
                   out_dir: str | Path | None = None, threads: int = 1, budget: float = DEFAULT_OP_BUDGET,
                   V: SmoothWeight | None = None, W: SmoothWeight | None = None) -> ExperimentReport:
    V = V or simple_bump()
    W = W or simple_bump()
    results = []
    for p in points:
        spec = SumSpec(lam, g, p.r, p.X, p.H, V, W)
        val = direct_sum(spec, threads, budget)
        triv = direct_sum(spec, threads, budget, absolute=True)
        results.append(PointResult(p.X, p.H, p.r, lam.label, val, triv, p.law))
    fits = {}
    for law in sorted({p.law for p in results if p.law is not None}):
        pts = [(p.X, abs(p.value)) for p in results if p.law == law and p.value != 0]
        if len(pts) >= 3:
            fits[law] = exponent_fit(pts)
    rep = ExperimentReport(results, fits, grid_hash(points, lam.label))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        rep.csv_path = out / f"experiment-{rep.grid_hash}.csv"
        rep.svg_path = out / f"experiment-{rep.grid_hash}.svg"
        write_experiment_csv(rep, rep.csv_path)
        rep.svg_path.write_text(loglog_svg(rep))
    return rep


def _fmt(v: float) -> str:
    return f"{v:.17e}"


def write_experiment_csv(rep: ExperimentReport, path: str | Path) -> None:
    lines = [",".join(CSV_COLUMNS)]
    for p in rep.points:
        lines.append(",".join([repr(p.X), repr(p.H), str(p.r), p.lam, _fmt(p.value), _fmt(p.trivial), _fmt(p.ratio)]))
    Path(path).write_text("\n".join(lines) + "\n")


# -- SVG -----------------------------------------------------------------------------------


def loglog_svg(rep: ExperimentReport, width: int = 640, height: int = 420) -> str:
    """Log-log plot of |S| (solid) and the trivial majorant (dashed) against X, one colour per H-law."""
    series = {}
    for p in rep.points:
        series.setdefault(p.law, []).append(p)
    xs = [p.X for p in rep.points]
    ys = [v for p in rep.points for v in (abs(p.value), p.trivial) if v > 0]
    if not xs or not ys:
        return f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}"></svg>\n'
    lx0, lx1 = math.log2(min(xs)), math.log2(max(xs))
    ly0, ly1 = math.floor(math.log10(min(ys))), math.ceil(math.log10(max(ys)))
    if lx1 == lx0:
        lx1 = lx0 + 1
    if ly1 == ly0:
        ly1 = ly0 + 1
    m = 60

    def px(x):
        return m + (math.log2(x) - lx0) / (lx1 - lx0) * (width - 2 * m)

    def py(y):
        return height - m - (math.log10(y) - ly0) / (ly1 - ly0) * (height - 2 * m)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">']
    out.append(f'<rect x="{m}" y="{m}" width="{width - 2 * m}" height="{height - 2 * m}" fill="none" stroke="black"/>')
    for k in range(math.ceil(lx0), math.floor(lx1) + 1):
        x = px(2.0**k)
        out.append(f'<line x1="{x:.2f}" y1="{height - m}" x2="{x:.2f}" y2="{height - m + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{height - m + 18}" text-anchor="middle">2^{k}</text>')
    for k in range(ly0, ly1 + 1):
        y = py(10.0**k)
        out.append(f'<line x1="{m - 5}" y1="{y:.2f}" x2="{m}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{m - 8}" y="{y + 4:.2f}" text-anchor="end">1e{k}</text>')
    colours = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    for i, (law, pts) in enumerate(sorted(series.items(), key=lambda kv: (kv[0] is None, kv[0] or 0))):
        col = colours[i % len(colours)]
        pts = sorted(pts, key=lambda p: p.X)
        s = " ".join(f"{px(p.X):.2f},{py(abs(p.value)):.2f}" for p in pts if p.value != 0)
        t = " ".join(f"{px(p.X):.2f},{py(p.trivial):.2f}" for p in pts if p.trivial > 0)
        out.append(f'<polyline points="{s}" fill="none" stroke="{col}" stroke-width="1.5"/>')
        out.append(f'<polyline points="{t}" fill="none" stroke="{col}" stroke-dasharray="4,3"/>')
        label = "H fixed" if law is None else f"H = X^{law}"
        out.append(f'<text x="{width - m - 4}" y="{m + 14 + 14 * i}" text-anchor="end" fill="{col}">{label}</text>')
    out.append(f'<text x="{width / 2}" y="{height - 15}" text-anchor="middle">X</text>')
    out.append(f'<text x="15" y="{height / 2}" transform="rotate(-90 15 {height / 2})" text-anchor="middle">|S(H,X)|</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
