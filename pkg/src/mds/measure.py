"""Left-continuous nondecreasing drivers, time grids, and regulated paths.

A driver h is an absolutely continuous density plus a finite ordered jump
list.  Evaluation is left-continuous (the jump at t is not yet counted at t),
and Stieltjes integration follows the half-open convention over [t0, t1):
the jump at the lower limit is included, the one at the upper limit is not.
This is exactly the convention under which the cumulative integral satisfies
p(t+) = p(t) + f(t) * jump(t) at every jump.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, GridError, UsageError


def _location_tol(a: float) -> float:
    # absolute tolerance for matching times against stored jump locations;
    # distinct grid quantities are separated by far more than this
    return 1e-12 * max(1.0, a)


@dataclass(frozen=True)
class JumpMeasure:
    """Driver h: initial value + absolutely continuous density + jumps.

    Parameters
    ----------
    domain_end : float
        Horizon a > 0; h lives on [0, a].
    density_nodes, density_values : ndarray
        The density h'_ac sampled on a uniform grid covering [0, a];
        values must be nonnegative (h nondecreasing).
    jump_locs, jump_sizes : ndarray
        Jump locations strictly increasing in (0, a), sizes strictly
        positive.  Jumps at 0 or a are not representable.
    initial : float
        h(0).  Added by :func:`eval_measure` only; integration against dh
        never sees it.
    """

    domain_end: float
    density_nodes: np.ndarray
    density_values: np.ndarray
    jump_locs: np.ndarray
    jump_sizes: np.ndarray
    initial: float = 0.0
    _density_cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        a = float(self.domain_end)
        if not (a > 0.0 and math.isfinite(a)):
            raise DomainError(f"domain_end must be positive and finite, got {a}")
        dn = np.asarray(self.density_nodes, dtype=float)
        dv = np.asarray(self.density_values, dtype=float)
        if dn.ndim != 1 or dn.shape != dv.shape or len(dn) < 2:
            raise UsageError("density must be sampled on >= 2 nodes")
        if not (dn[0] == 0.0 and abs(dn[-1] - a) <= _location_tol(a)):
            raise UsageError("density grid must cover [0, a]")
        if np.any(np.diff(dn) <= 0.0):
            raise UsageError("density grid must be strictly increasing")
        if np.any(dv < 0.0) or not np.all(np.isfinite(dv)):
            raise UsageError("density samples must be finite and nonnegative")
        locs = np.asarray(self.jump_locs, dtype=float)
        sizes = np.asarray(self.jump_sizes, dtype=float)
        if locs.shape != sizes.shape or locs.ndim != 1:
            raise UsageError("jump locations and sizes must align")
        if locs.size:
            if np.any(np.diff(locs) <= 0.0):
                raise UsageError("jump locations must be strictly increasing")
            if locs[0] <= 0.0 or locs[-1] >= a:
                raise DomainError("jump locations must lie strictly inside (0, a)")
            if np.any(sizes <= 0.0) or not np.all(np.isfinite(sizes)):
                raise UsageError("jump sizes must be finite and positive")
        cum = np.zeros(len(dn))
        np.cumsum(np.diff(dn) * (dv[:-1] + dv[1:]) / 2.0, out=cum[1:])
        for name, arr in (("density_nodes", dn), ("density_values", dv),
                          ("jump_locs", locs), ("jump_sizes", sizes),
                          ("_density_cum", cum)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def density_mass(self) -> float:
        return float(self._density_cum[-1])

    def total_jump_mass(self) -> float:
        return math.fsum(self.jump_sizes)


def constant_measure(domain_end: float = 1.0) -> JumpMeasure:
    """Degenerate driver h == const: zero density, no jumps."""
    return JumpMeasure(domain_end, np.array([0.0, domain_end]),
                       np.zeros(2), np.zeros(0), np.zeros(0))


def lebesgue_measure(domain_end: float = 1.0, samples: int = 2) -> JumpMeasure:
    """Driver h(t) = t: unit density, no jumps."""
    return JumpMeasure(domain_end, np.linspace(0.0, domain_end, max(2, samples)),
                       np.ones(max(2, samples)), np.zeros(0), np.zeros(0))


def zeno_measure(k_max: int = 20) -> JumpMeasure:
    """Staircase driver with jumps accumulating toward t = 1, truncated.

    Jumps sit at 1 - 1/k with size 1/k - 1/(k+1) for k = 2..k_max, plus a
    closing jump of size 1/(k_max+1) at 1 - 1/(k_max+1), so the truncation
    carries exactly k_max jumps, total jump mass exactly 1/2, and h(1) = 1
    together with the initial value h(0) = 1/2.
    """
    if k_max < 2:
        raise UsageError("zeno truncation needs k_max >= 2")
    locs = [1.0 - 1.0 / k for k in range(2, k_max + 1)]
    sizes = [1.0 / k - 1.0 / (k + 1) for k in range(2, k_max + 1)]
    locs.append(1.0 - 1.0 / (k_max + 1))
    sizes.append(1.0 / (k_max + 1))
    return JumpMeasure(1.0, np.array([0.0, 1.0]), np.zeros(2),
                       np.array(locs), np.array(sizes), initial=0.5)


def _check_domain(h: JumpMeasure, t: float) -> None:
    tol = _location_tol(h.domain_end)
    if t < -tol or t > h.domain_end + tol:
        raise DomainError(f"t={t} outside [0, {h.domain_end}]")


def eval_measure(h: JumpMeasure, t: float) -> float:
    """Left-continuous evaluation h(t) = h(0) + int_0^t h'_ac + sum of jumps before t."""
    _check_domain(h, t)
    t = min(max(float(t), 0.0), h.domain_end)
    x = h.density_nodes
    pos = int(np.searchsorted(x, t, side="right")) - 1
    pos = min(max(pos, 0), len(x) - 1)
    acc = h._density_cum[pos]
    if pos < len(x) - 1 and t > x[pos]:
        # partial cell: density interpolated linearly inside the cell
        frac = (t - x[pos]) / (x[pos + 1] - x[pos])
        dv_t = h.density_values[pos] + frac * (h.density_values[pos + 1] - h.density_values[pos])
        acc += (h.density_values[pos] + dv_t) / 2.0 * (t - x[pos])
    tol = _location_tol(h.domain_end)
    jumps = float(np.sum(h.jump_sizes[h.jump_locs < t - tol]))
    return float(h.initial + acc + jumps)


def jump_at(h: JumpMeasure, t: float) -> float:
    """Jump size at t (0 if t is not a jump location)."""
    _check_domain(h, t)
    tol = _location_tol(h.domain_end)
    hit = np.abs(h.jump_locs - t) <= tol
    if np.any(hit):
        return float(h.jump_sizes[np.argmax(hit)])
    return 0.0


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing nodes covering [0, a] with jump nodes flagged."""

    nodes: np.ndarray
    jump_flags: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        flags = np.asarray(self.jump_flags, dtype=bool)
        if nodes.ndim != 1 or len(nodes) < 2 or flags.shape != nodes.shape:
            raise GridError("grid needs >= 2 nodes with aligned jump flags")
        if np.any(np.diff(nodes) <= 0.0):
            raise GridError("grid nodes must be strictly increasing")
        if nodes[0] != 0.0:
            raise GridError("grid must start at 0")
        nodes.setflags(write=False)
        flags.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "jump_flags", flags)

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def end(self) -> float:
        return float(self.nodes[-1])

    def node_index(self, t: float) -> int:
        """Index of the node equal to t (within tolerance); GridError otherwise."""
        i = int(np.searchsorted(self.nodes, t))
        tol = _location_tol(self.end)
        for j in (i - 1, i, i + 1):
            if 0 <= j < len(self.nodes) and abs(self.nodes[j] - t) <= tol:
                return j
        raise GridError(f"t={t!r} is not a grid node")

    def is_uniform(self, rel_tol: float = 1e-9) -> bool:
        d = np.diff(self.nodes)
        return bool(np.max(d) - np.min(d) <= rel_tol * np.max(d))


def build_time_grid(h: JumpMeasure, base_nodes: int) -> TimeGrid:
    """Uniform base grid on [0, a] with every jump location inserted exactly.

    A base node closer than 0.45 of the base spacing to a jump is dropped
    (endpoints never are) so the merged grid has no degenerate cells beyond
    those dictated by the jump geometry itself.
    """
    if base_nodes < 2:
        raise GridError("need at least 2 base nodes")
    a = h.domain_end
    base = np.linspace(0.0, a, base_nodes)
    step = a / (base_nodes - 1)
    keep = np.ones(base_nodes, dtype=bool)
    for loc in h.jump_locs:
        idx = int(round(loc / step))
        if 0 < idx < base_nodes - 1 and abs(base[idx] - loc) < 0.45 * step:
            keep[idx] = False
    nodes = np.concatenate([base[keep], h.jump_locs])
    order = np.argsort(nodes, kind="stable")
    nodes = nodes[order]
    flags = np.concatenate([np.zeros(int(keep.sum()), dtype=bool),
                            np.ones(len(h.jump_locs), dtype=bool)])[order]
    return TimeGrid(nodes, flags)


def density_on_grid(h: JumpMeasure, grid: TimeGrid) -> np.ndarray:
    """Density samples h'_ac at the grid nodes (linear interpolation)."""
    return np.interp(grid.nodes, h.density_nodes, h.density_values)


def jump_sizes_on_grid(h: JumpMeasure, grid: TimeGrid) -> np.ndarray:
    """Per-node jump sizes (zero off jump nodes); grid must contain all jumps."""
    out = np.zeros(len(grid))
    for loc, size in zip(h.jump_locs, h.jump_sizes):
        out[grid.node_index(loc)] = size
    return out


@dataclass(frozen=True)
class RegulatedTrajectory:
    """A path on the grid with explicit left and right values per node.

    ``values`` are the left values (the path is left-continuous);
    ``right_values`` differ only at jump-flagged nodes.
    """

    grid: TimeGrid
    values: np.ndarray
    right_values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        r = np.asarray(self.right_values, dtype=float)
        if v.shape != r.shape or v.shape[0] != len(self.grid):
            raise GridError("trajectory arrays must align with the grid")
        v.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "right_values", r)

    def sup_norm(self) -> float:
        """sup over nodes of the state norm, taken over left and right values."""
        return max(_state_norms(self.values).max(), _state_norms(self.right_values).max())


def _state_norms(arr: np.ndarray) -> np.ndarray:
    if arr.ndim == 1:
        return np.abs(arr)
    return np.sqrt(np.sum(arr * arr, axis=-1))


def _samples_for(grid: TimeGrid, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.ndim == 0:
        return np.full(len(grid), float(f))
    if f.shape[0] != len(grid) or not np.all(np.isfinite(f)):
        raise GridError("integrand must provide one finite sample per grid node")
    return f


def ls_integral(f, h: JumpMeasure, grid: TimeGrid, t0: float, t1: float):
    """Stieltjes integral of f against dh over the half-open window [t0, t1).

    f is node-sampled on the grid (scalar per node, or a vector per node).
    The density part is a composite trapezoid over [t0, t1]; jumps located in
    [t0, t1) contribute f(t_i) * d_i using the LEFT value of f.

    Both endpoints must be grid nodes.
    """
    if t1 < t0:
        raise UsageError(f"integration window reversed: [{t0}, {t1})")
    f = _samples_for(grid, f)
    i0 = grid.node_index(t0)
    i1 = grid.node_index(t1)
    hp = density_on_grid(h, grid)
    fh = f * (hp if f.ndim == 1 else hp[:, None])
    d = np.diff(grid.nodes[i0:i1 + 1])
    if f.ndim == 1:
        acc = float(np.sum(d * (fh[i0:i1] + fh[i0 + 1:i1 + 1]) / 2.0)) if i1 > i0 else 0.0
    else:
        acc = (d[:, None] * (fh[i0:i1] + fh[i0 + 1:i1 + 1]) / 2.0).sum(axis=0) \
            if i1 > i0 else np.zeros(f.shape[1])
    tol = _location_tol(h.domain_end)
    terms = [f[grid.node_index(loc)] * size
             for loc, size in zip(h.jump_locs, h.jump_sizes)
             # half-open: jump at t0 in, jump at t1 out
             if t0 - tol <= loc < t1 - tol]
    if not terms:
        return acc
    # compensated summation so telescoping jump families cancel exactly
    if f.ndim == 1:
        return acc + math.fsum(terms)
    return acc + np.array([math.fsum(col) for col in zip(*terms)])


def cumulative(f, h: JumpMeasure, grid: TimeGrid, t0: float = 0.0) -> RegulatedTrajectory:
    """Running Stieltjes integral p(t) = int_{[t0, t)} f dh at every node.

    Right values at jump nodes satisfy p(t+) = p(t) + f(t)*jump(t) bitwise:
    the accumulation advances through each jump via its right value.
    Nodes before t0 carry 0.
    """
    f = _samples_for(grid, f)
    i0 = grid.node_index(t0)
    hp = density_on_grid(h, grid)
    sizes = jump_sizes_on_grid(h, grid)
    shape = (len(grid),) if f.ndim == 1 else (len(grid), f.shape[1])
    values = np.zeros(shape)
    right = np.zeros(shape)
    for j in range(i0, len(grid) - 1):
        right[j] = values[j] + f[j] * sizes[j]
        cell = (grid.nodes[j + 1] - grid.nodes[j]) * (f[j] * hp[j] + f[j + 1] * hp[j + 1]) / 2.0
        values[j + 1] = right[j] + cell
    last = len(grid) - 1
    right[last] = values[last] + f[last] * sizes[last]
    return RegulatedTrajectory(grid, values, right)
