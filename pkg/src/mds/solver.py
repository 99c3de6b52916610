"""The solution operator psi and Picard iteration for mild solutions.

    (psi zeta)(t) = R(t,0)(zeta0 - g(zeta))
                  + int_0^t R(t,s) V u(s) ds
                  + int_[0,t) R(t,s) delta(s, zeta(s)) dh(s)

The u integral is Lebesgue (Simpson prefix rows); the dh integral splits
into a density part (trapezoid prefix rows, matching ls_integral) and the
jumps strictly before t, evaluated at left values.  Right values at jump
nodes carry the increment delta(t, zeta(t)) * jump(t) because R(t,t) = Id.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, GridError
from .measure import RegulatedTrajectory
from .scenario import Scenario


def _check_grid(scn: Scenario, traj: RegulatedTrajectory) -> None:
    if len(traj.grid) != len(scn.grid) or not np.array_equal(traj.grid.nodes, scn.grid.nodes):
        raise GridError("trajectory is sampled on a different grid than the scenario")


def _as_control(scn: Scenario, u) -> np.ndarray | None:
    if u is None:
        return None
    u = np.asarray(u, dtype=float)
    if u.shape != (len(scn.grid), scn.n_modes):
        raise GridError("control samples must be one mode vector per grid node")
    return u


def apply_psi(scn: Scenario, traj: RegulatedTrajectory, u=None) -> RegulatedTrajectory:
    """One application of the solution operator to the iterate ``traj``."""
    _check_grid(scn, traj)
    u = _as_control(scn, u)
    data = scn.resolvent().data                       # (N, M, M)
    g = scn.g_of(traj.values)
    values = data[:, :, 0].T * (scn.zeta0 - g)        # (M, N)

    if u is not None:
        values = values + np.einsum("js,njs,sn->jn", scn.wq_rows, data,
                                    u * scn.theta, optimize=True)

    delta = scn.delta_values(traj.values)
    if not scn.nonlinearity.is_zero:
        forced = delta * scn.density[:, None]
        values = values + np.einsum("js,njs,sn->jn", scn.wtrap_rows, data,
                                    forced, optimize=True)
        for i in scn.jump_rows:
            contrib = data[:, :, i].T * (delta[i] * scn.jump_sizes[i])
            contrib[:i + 1] = 0.0                     # jump at t_i acts only for t > t_i
            values = values + contrib

    right = values.copy()
    rows = scn.jump_rows
    if rows.size:
        right[rows] += delta[rows] * scn.jump_sizes[rows, None]
    return RegulatedTrajectory(scn.grid, values, right)


def initial_iterate(scn: Scenario) -> RegulatedTrajectory:
    """Picard seed zeta^0(t) = R(t,0) zeta0."""
    vals = scn.resolvent().data[:, :, 0].T * scn.zeta0
    return RegulatedTrajectory(scn.grid, vals, vals.copy())


def _sup_distance(a: RegulatedTrajectory, b: RegulatedTrajectory) -> float:
    dv = np.sqrt(np.sum((a.values - b.values) ** 2, axis=-1)).max()
    dr = np.sqrt(np.sum((a.right_values - b.right_values) ** 2, axis=-1)).max()
    return float(max(dv, dr))


@dataclass(frozen=True)
class PicardResult:
    trajectory: RegulatedTrajectory
    iterations: int
    final_delta: float
    deltas: tuple


def picard_solve(scn: Scenario, u=None) -> PicardResult:
    """Iterate psi from the seed until successive sup-node distance < tol_picard.

    With no nonlinearity and no nonlocal term psi does not depend on its
    iterate, so a single sweep is the fixed point.
    """
    if scn.tol.max_picard < 1:
        raise ConvergenceError("max_picard exhausted before any sweep", [])
    current = initial_iterate(scn)
    if scn.nonlinearity.is_zero and scn.nonlocal_term.is_zero:
        # psi does not depend on its iterate: one sweep is the fixed point
        return PicardResult(apply_psi(scn, current, u), 1, 0.0, (0.0,))
    deltas = []
    for sweep in range(1, scn.tol.max_picard + 1):
        new = apply_psi(scn, current, u)
        delta = _sup_distance(new, current)
        deltas.append(delta)
        if delta < scn.tol.tol_picard:
            return PicardResult(new, sweep, delta, tuple(deltas))
        current = new
    raise ConvergenceError(
        f"no Picard convergence in {scn.tol.max_picard} sweeps "
        f"(last delta {deltas[-1]:.3e}); the smallness conditions "
        f"are likely violated", deltas)


def jump_consistency(traj: RegulatedTrajectory, scn: Scenario) -> float:
    """Max over jump nodes of ||zeta(t+) - zeta(t) - delta(t, zeta(t)) jump(t)||."""
    _check_grid(scn, traj)
    rows = scn.jump_rows
    if rows.size == 0:
        return 0.0
    delta = scn.delta_values(traj.values[rows])
    gap = traj.right_values[rows] - traj.values[rows] - delta * scn.jump_sizes[rows, None]
    return float(np.sqrt(np.sum(gap * gap, axis=-1)).max())


def discontinuity_count(traj: RegulatedTrajectory) -> int:
    """Number of nodes where the right value differs from the left value."""
    return int(np.sum(np.any(traj.right_values != traj.values, axis=-1)))
