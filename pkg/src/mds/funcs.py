"""Closed-form time coefficients and memory kernels.

Everything the evolution factor integrates exactly lives here: each time
function carries its own antiderivative so propagator exponents never pick
up quadrature error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UsageError

_TIME_KINDS = ("const", "affine", "sine", "cosine")
_KERNEL_KINDS = ("zero", "const", "exp_diff")


@dataclass(frozen=True)
class TimeFunction:
    """f(t) from a small catalog with an exact antiderivative.

    const:  f = c0
    affine: f = c0 + c1*t
    sine:   f = c0 + c1*sin(freq*t)
    cosine: f = c0 + c1*cos(freq*t)
    """

    kind: str
    c0: float = 0.0
    c1: float = 0.0
    freq: float = 1.0

    def __post_init__(self):
        if self.kind not in _TIME_KINDS:
            raise UsageError(f"unknown time function kind {self.kind!r}")
        if self.kind in ("sine", "cosine") and self.freq == 0.0:
            raise UsageError("oscillatory time function needs freq != 0")

    def value(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "const":
            return np.full_like(t, self.c0)
        if self.kind == "affine":
            return self.c0 + self.c1 * t
        if self.kind == "sine":
            return self.c0 + self.c1 * np.sin(self.freq * t)
        return self.c0 + self.c1 * np.cos(self.freq * t)

    def antiderivative(self, t):
        """F(t) with F(0) = 0, exact."""
        t = np.asarray(t, dtype=float)
        if self.kind == "const":
            return self.c0 * t
        if self.kind == "affine":
            return self.c0 * t + self.c1 * t * t / 2.0
        if self.kind == "sine":
            return self.c0 * t + self.c1 * (1.0 - np.cos(self.freq * t)) / self.freq
        return self.c0 * t + self.c1 * np.sin(self.freq * t) / self.freq

    def integral(self, s, t):
        return self.antiderivative(t) - self.antiderivative(s)

    def sup_abs(self, a: float) -> float:
        if self.kind == "const":
            return abs(self.c0)
        if self.kind == "affine":
            return max(abs(self.c0), abs(self.c0 + self.c1 * a))
        # dense sample; endpoints of the envelope are included when reached
        return float(np.max(np.abs(self.value(np.linspace(0.0, a, 4097)))))


def constant(v: float) -> TimeFunction:
    return TimeFunction("const", c0=v)


@dataclass(frozen=True)
class MemoryKernel:
    """Convolution-type kernel G(t, s), evaluated on t >= s.

    zero:     G = 0
    const:    G = c0
    exp_diff: G = c0 * exp(-rate*(t-s))
    """

    kind: str
    c0: float = 0.0
    rate: float = 0.0

    def __post_init__(self):
        if self.kind not in _KERNEL_KINDS:
            raise UsageError(f"unknown kernel kind {self.kind!r}")

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or (self.kind != "zero" and self.c0 == 0.0)

    def value(self, t, s):
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        if self.kind == "zero":
            return np.zeros(np.broadcast(t, s).shape)
        if self.kind == "const":
            return np.full(np.broadcast(t, s).shape, self.c0)
        return self.c0 * np.exp(-self.rate * (t - s))

    def matrix(self, nodes: np.ndarray) -> np.ndarray:
        """G(t_j, t_u) for all node pairs; only j >= u is ever used."""
        nodes = np.asarray(nodes, dtype=float)
        return self.value(nodes[:, None], nodes[None, :])

    def sup_abs(self, a: float) -> float:
        if self.is_zero:
            return 0.0
        if self.kind == "const":
            return abs(self.c0)
        return abs(self.c0) * max(1.0, float(np.exp(-self.rate * a)))


def zero_kernel() -> MemoryKernel:
    return MemoryKernel("zero")
