"""Smooth compactly supported test functions.

Every shape is built from the C-infinity smoothstep
``s(t) = a(t) / (a(t) + a(1 - t))`` with ``a(t) = exp(-1/t)`` for t > 0.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .arith import e

SHAPES = ("simple_bump", "bump_eq1_on_unit2", "plateau_delta")


def _a(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smoothstep(t) -> np.ndarray:
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    a, b = _a(t), _a(1.0 - t)
    return a / (a + b)


@dataclass(frozen=True)
class SmoothWeight:
    """A bump ``w`` on the unit scale, used as ``y -> w(y / scale) * e(twist * y)``.

    simple_bump
        supported on [1, 2], rising on [1, 3/2] and falling on [3/2, 2].
    bump_eq1_on_unit2
        supported on [1/2, 5/2] and identically 1 on [1, 2].
    plateau_delta
        supported on [1, 2], identically 1 on [1 + 1/delta, 2 - 1/delta].
    """

    shape: str = "simple_bump"
    scale: float = 1.0
    twist: float = 0.0
    delta: float = 2.0
    amplitude: float = 1.0

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.shape == "plateau_delta" and self.delta <= 1:
            raise ValueError("plateau_delta needs delta > 1")

    @property
    def unit_support(self) -> tuple[float, float]:
        return (0.5, 2.5) if self.shape == "bump_eq1_on_unit2" else (1.0, 2.0)

    @property
    def support(self) -> tuple[float, float]:
        lo, hi = self.unit_support
        return lo * self.scale, hi * self.scale

    @property
    def transition_width(self) -> float:
        """Width of the narrowest rise/fall on the unit scale."""
        return 1.0 / self.delta if self.shape == "plateau_delta" else 0.5

    @property
    def derivative_bound(self) -> float:
        """P with w^(j) << P^j on the unit scale."""
        return self.delta if self.shape == "plateau_delta" else 1.0

    @property
    def unit_twist(self) -> float:
        """Twist frequency seen by the unit-scale shape."""
        return self.twist * self.scale

    def unit(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.shape == "simple_bump":
            v = smoothstep(2.0 * (u - 1.0)) * smoothstep(2.0 * (2.0 - u))
        elif self.shape == "bump_eq1_on_unit2":
            v = smoothstep(2.0 * (u - 0.5)) * smoothstep(2.0 * (2.5 - u))
        else:
            v = smoothstep(self.delta * (u - 1.0)) * smoothstep(self.delta * (2.0 - u))
        return self.amplitude * v

    def unit_twisted(self, u):
        v = self.unit(u)
        if self.twist == 0.0:
            return v
        return v * e(self.unit_twist * np.asarray(u, dtype=float))

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        v = self.unit(y / self.scale)
        if self.twist == 0.0:
            return v
        return v * e(self.twist * y)

    def at_scale(self, scale: float) -> "SmoothWeight":
        return replace(self, scale=float(scale))

    def scaled_by(self, factor: float) -> "SmoothWeight":
        return replace(self, amplitude=self.amplitude * factor)


def simple_bump(scale: float = 1.0, twist: float = 0.0) -> SmoothWeight:
    return SmoothWeight("simple_bump", scale, twist)


def bump_eq1_on_unit2(scale: float = 1.0, twist: float = 0.0) -> SmoothWeight:
    return SmoothWeight("bump_eq1_on_unit2", scale, twist)


def plateau(delta: float, scale: float = 1.0, twist: float = 0.0) -> SmoothWeight:
    return SmoothWeight("plateau_delta", scale, twist, delta)
