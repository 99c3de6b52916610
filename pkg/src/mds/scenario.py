"""Scenario assembly: system data plus the shared quadrature caches.

A Scenario freezes everything a run needs: basis, linear part, driver,
grid, states, nonlinearity, nonlocal term, control gains, tolerances.
It also owns the one Lebesgue-in-t quadrature rule (composite Simpson
prefix rows) that the solver, the control synthesis, and the Gramians
all share; using a single rule everywhere is what makes the steering
residual cancel exactly instead of to quadrature order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._quad import simpson_prefix_matrix, trapezoid_prefix_matrix, trapezoid_weights
from .errors import UsageError
from .funcs import TimeFunction
from .measure import (JumpMeasure, TimeGrid, build_time_grid, density_on_grid,
                      jump_sizes_on_grid)
from .spectral import LinearPart, ResolventTable, SpectralBasis, build_resolvent_table

_NL_KINDS = ("zero", "cosine", "table")
_NONLOCAL_KINDS = ("zero", "log_kernel")


@dataclass(frozen=True, eq=False)
class NonlinearityEval:
    """State nonlinearity delta(t, zeta) evaluated in mode coefficients.

    cosine: amplitude * cos applied pointwise at the collocation nodes,
    projected back to modes.  table: fixed state-independent samples,
    one coefficient row per grid node (or a single broadcast row).
    """

    kind: str
    amplitude: float = 0.0
    table: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in _NL_KINDS:
            raise UsageError(f"unknown nonlinearity kind {self.kind!r}")
        if self.kind == "table":
            if self.table is None:
                raise UsageError("table nonlinearity needs sample values")
            object.__setattr__(self, "table", np.asarray(self.table, dtype=float))

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or (self.kind == "cosine" and self.amplitude == 0.0)

    def values(self, basis: SpectralBasis, states: np.ndarray) -> np.ndarray:
        """delta at each row of states ((..., N) coefficients in, same shape out)."""
        states = np.asarray(states, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(states)
        if self.kind == "cosine":
            phys = basis.to_physical(states)
            return basis.to_modes(self.amplitude * np.cos(phys))
        return np.broadcast_to(self.table, states.shape).copy()

    def bound_const(self) -> float:
        """n(s): uniform bound used by the smallness conditions."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "cosine":
            return abs(self.amplitude)
        rows = np.atleast_2d(self.table)
        return float(np.max(np.sqrt(np.sum(rows * rows, axis=-1))))

    def lipschitz_const(self) -> float:
        """U(s): Lipschitz constant in the state (0 for state-independent kinds)."""
        return abs(self.amplitude) if self.kind == "cosine" else 0.0


@dataclass(frozen=True, eq=False)
class NonlocalEval:
    """Nonlocal term g(zeta), a state-space vector built from the whole path.

    log_kernel: g(zeta)(x) = int_0^a f(t,x) [ int log(1+|zeta(t)(p)|^(1/2)) dp ] dt
    with f(t,x) = f_time(t) * f_space(x), the p-integral over the collocation
    nodes and the t-integral by trapezoid on the grid.
    """

    kind: str
    f_time: TimeFunction | None = None
    f_space: TimeFunction | None = None
    offset: float = 1.0     # the additive growth constant d in ||g|| <= c||zeta|| + d

    def __post_init__(self):
        if self.kind not in _NONLOCAL_KINDS:
            raise UsageError(f"unknown nonlocal kind {self.kind!r}")
        if self.kind == "log_kernel" and self.f_time is None:
            raise UsageError("log_kernel nonlocal term needs an f spec")

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"

    def _f_grid(self, basis: SpectralBasis, grid: TimeGrid) -> tuple[np.ndarray, np.ndarray]:
        ft = self.f_time.value(grid.nodes)
        fx = (self.f_space.value(basis.x) if self.f_space is not None
              else np.ones_like(basis.x))
        return ft, fx

    def apply(self, basis: SpectralBasis, grid: TimeGrid,
              values: np.ndarray) -> np.ndarray:
        """g of the sampled path (left values, (M, N)) as mode coefficients."""
        if self.kind == "zero":
            return np.zeros(basis.n_modes)
        ft, fx = self._f_grid(basis, grid)
        phys = basis.to_physical(values)                     # (M, J)
        inner = np.log1p(np.sqrt(np.abs(phys))) @ basis.weights
        t_int = float(trapezoid_weights(grid.nodes) @ (ft * inner))
        return basis.to_modes(fx * t_int)

    def growth_c(self, basis: SpectralBasis, grid: TimeGrid) -> float:
        """c = max |f(t,x)| over the samples."""
        if self.kind == "zero":
            return 0.0
        ft, fx = self._f_grid(basis, grid)
        return float(np.max(np.abs(ft)) * np.max(np.abs(fx)))


@dataclass(frozen=True)
class Tolerances:
    tol_picard: float = 1e-10
    tol_target: float = 1e-4
    tol_pde: float = 1e-3
    max_picard: int = 64
    max_outer: int = 20

    def __post_init__(self):
        for name in ("tol_picard", "tol_target", "tol_pde"):
            if not getattr(self, name) > 0.0:
                raise UsageError(f"{name} must be positive")
        for name in ("max_picard", "max_outer"):
            if getattr(self, name) < 0:
                raise UsageError(f"{name} must be nonnegative")


@dataclass(frozen=True, eq=False)
class Scenario:
    basis: SpectralBasis
    linear: LinearPart
    h: JumpMeasure
    grid: TimeGrid
    zeta0: np.ndarray
    zeta1: np.ndarray
    nonlinearity: NonlinearityEval
    nonlocal_term: NonlocalEval
    theta: np.ndarray
    tol: Tolerances
    config: dict | None = field(default=None, repr=False)
    # shared quadrature caches, filled on construction
    wq_rows: np.ndarray = field(init=False, repr=False)
    wq_full: np.ndarray = field(init=False, repr=False)
    wtrap_rows: np.ndarray = field(init=False, repr=False)
    wtrap: np.ndarray = field(init=False, repr=False)
    density: np.ndarray = field(init=False, repr=False)
    jump_sizes: np.ndarray = field(init=False, repr=False)
    jump_rows: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = self.basis.n_modes
        for name in ("zeta0", "zeta1"):
            vec = np.asarray(getattr(self, name), dtype=float)
            if vec.shape != (n,):
                raise UsageError(f"{name} must have one coefficient per mode")
            vec.setflags(write=False)
            object.__setattr__(self, name, vec)
        theta = np.asarray(self.theta, dtype=float)
        if theta.ndim == 0:
            theta = np.full(n, float(theta))
        if theta.shape != (n,):
            raise UsageError("theta must be scalar or one gain per mode")
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        if self.nonlinearity.kind == "table":
            rows = np.atleast_2d(self.nonlinearity.table)
            if rows.shape[-1] != n or rows.shape[0] not in (1, len(self.grid)):
                raise UsageError("nonlinearity table must broadcast to (grid, modes)")
        object.__setattr__(self, "wq_rows", simpson_prefix_matrix(self.grid.nodes))
        object.__setattr__(self, "wq_full", self.wq_rows[-1])
        object.__setattr__(self, "wtrap_rows", trapezoid_prefix_matrix(self.grid.nodes))
        object.__setattr__(self, "wtrap", trapezoid_weights(self.grid.nodes))
        object.__setattr__(self, "density", density_on_grid(self.h, self.grid))
        sizes = jump_sizes_on_grid(self.h, self.grid)   # raises if a jump is off-grid
        object.__setattr__(self, "jump_sizes", sizes)
        object.__setattr__(self, "jump_rows", np.where(sizes > 0.0)[0])
        object.__setattr__(self, "_table_cache", None)

    @property
    def n_modes(self) -> int:
        return self.basis.n_modes

    @property
    def horizon(self) -> float:
        return self.grid.end

    def resolvent(self) -> ResolventTable:
        """The resolvent table for this scenario, built once and cached."""
        if self._table_cache is None:
            object.__setattr__(self, "_table_cache",
                               build_resolvent_table(self.basis, self.linear, self.grid))
        return self._table_cache

    def delta_values(self, states: np.ndarray) -> np.ndarray:
        return self.nonlinearity.values(self.basis, states)

    def g_of(self, values: np.ndarray) -> np.ndarray:
        return self.nonlocal_term.apply(self.basis, self.grid, values)


def assemble_scenario(basis: SpectralBasis, linear: LinearPart, h: JumpMeasure,
                      base_nodes: int, zeta0, zeta1,
                      nonlinearity: NonlinearityEval | None = None,
                      nonlocal_term: NonlocalEval | None = None,
                      theta=1.0, tol: Tolerances | None = None,
                      config: dict | None = None) -> Scenario:
    """Build a Scenario on the merged grid (uniform base + jump nodes)."""
    grid = build_time_grid(h, base_nodes)
    return Scenario(basis, linear, h, grid, np.asarray(zeta0, dtype=float),
                    np.asarray(zeta1, dtype=float),
                    nonlinearity or NonlinearityEval("zero"),
                    nonlocal_term or NonlocalEval("zero"),
                    theta, tol or Tolerances(), config)
