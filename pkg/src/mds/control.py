"""Steering operator Z, its minimal-norm inverse, and the outer loop.

Z u = int_0^a R(a,s) V u(s) ds with V = diag(theta).  Because R acts
diagonally, the normal equations decouple into scalar mode Gramians
gamma_n = theta_n^2 Q[r_n(a,.)^2] under the shared quadrature Q, and the
minimal-L2 preimage of p is u_n(s) = theta_n r_n(a,s) p_n / gamma_n.
A dense Gramian path covers non-diagonal gain matrices.

Sharing Q between z_apply, the Gramians, the control norm and the
solver's u integral makes z_apply(min_norm_inverse(p)) = p and the
linear-case terminal identity hold to roundoff, not just to quadrature
order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateModeError, GridError, SteeringError
from .measure import RegulatedTrajectory
from .scenario import Scenario
from .solver import picard_solve
from .spectral import ResolventTable

GAMMA_FLOOR = 1e-12
_TIKHONOV = 1e-10


@dataclass(frozen=True, eq=False)
class ControlSignal:
    """Mode-coefficient control samples, one row per grid node."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def l2_norm(self, weights: np.ndarray) -> float:
        """(int ||u(t)||^2 dt)^(1/2) under the supplied quadrature weights."""
        return float(np.sqrt(weights @ np.sum(self.samples ** 2, axis=-1)))


def _weights_for(table: ResolventTable, weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.shape != (len(table.grid),):
        raise GridError("quadrature weights must match the grid")
    return w


def gramians(table: ResolventTable, theta: np.ndarray, weights) -> np.ndarray:
    """gamma_n = theta_n^2 int_0^a r_n(a,s)^2 ds."""
    w = _weights_for(table, weights)
    final = table.final_row()
    return np.asarray(theta, dtype=float) ** 2 * ((final * final) @ w)


def z_apply(table: ResolventTable, theta, u: ControlSignal, weights) -> np.ndarray:
    """Mode n of Zu: int_0^a r_n(a,s) theta_n u_n(s) ds."""
    w = _weights_for(table, weights)
    samples = u.samples if isinstance(u, ControlSignal) else np.asarray(u, dtype=float)
    return np.asarray(theta, dtype=float) * ((table.final_row() * samples.T) @ w)


def min_norm_inverse(table: ResolventTable, theta, p: np.ndarray, weights,
                     gamma_floor: float = GAMMA_FLOOR) -> ControlSignal:
    """Minimal-L2-norm grid preimage of p under Z (per-mode normal equations)."""
    theta = np.asarray(theta, dtype=float)
    gam = gramians(table, theta, weights)
    bad = np.where(gam <= gamma_floor)[0]
    if bad.size:
        raise DegenerateModeError(int(bad[0]) + 1, float(gam[bad[0]]), gamma_floor)
    p = np.asarray(p, dtype=float)
    samples = table.final_row().T * (theta * p / gam)
    return ControlSignal(samples)


def z_apply_dense(table: ResolventTable, gain: np.ndarray, u, weights) -> np.ndarray:
    """Zu for a full gain matrix V: int R(a,s) V u(s) ds."""
    w = _weights_for(table, weights)
    samples = u.samples if isinstance(u, ControlSignal) else np.asarray(u, dtype=float)
    vu = samples @ np.asarray(gain, dtype=float).T          # (M, N)
    return (table.final_row() * vu.T) @ w


def min_norm_inverse_dense(table: ResolventTable, gain: np.ndarray, p: np.ndarray,
                           weights) -> ControlSignal:
    """Minimal-norm preimage for a full gain matrix via the dense Gramian.

    W = int D(s) V V^T D(s) ds with D(s) = diag(r_n(a,s)); solve W beta = p
    by Cholesky, with a scaled Tikhonov retry if the factorization fails,
    then u(s) = V^T D(s) beta.
    """
    w = _weights_for(table, weights)
    gain = np.asarray(gain, dtype=float)
    final = table.final_row()                               # (N, M)
    vvt = gain @ gain.T
    gram = np.einsum("s,ns,nm,ms->nm", w, final, vvt, final, optimize=True)
    p = np.asarray(p, dtype=float)
    try:
        beta = np.linalg.solve(gram, p)
    except np.linalg.LinAlgError:
        ridge = _TIKHONOV * max(np.trace(gram) / len(gram), 1.0)
        beta = np.linalg.solve(gram + ridge * np.eye(len(gram)), p)
    samples = (final * beta[:, None]).T @ gain              # (M, N_c)
    return ControlSignal(samples)


def _dh_terminal(scn: Scenario, delta: np.ndarray) -> np.ndarray:
    """int_[0,a) R(a,s) delta(s) dh(s): density trapezoid plus left-value jumps."""
    final = scn.resolvent().final_row()                     # (N, M)
    acc = (final * (delta * scn.density[:, None]).T) @ scn.wtrap
    for i in scn.jump_rows:
        acc = acc + final[:, i] * delta[i] * scn.jump_sizes[i]
    return acc


def steering_residual(scn: Scenario, traj: RegulatedTrajectory) -> np.ndarray:
    """p = zeta1 - g(zeta) - R(a,0)(zeta0 - g(zeta)) - int R(a,s) delta dh."""
    g = scn.g_of(traj.values)
    final = scn.resolvent().final_row()
    delta = scn.delta_values(traj.values)
    return (scn.zeta1 - g - final[:, 0] * (scn.zeta0 - g)
            - _dh_terminal(scn, delta))


def synthesize_control(scn: Scenario, traj: RegulatedTrajectory,
                       gamma_floor: float = GAMMA_FLOOR) -> ControlSignal:
    """The steering control for the current iterate: Z^-1 of the residual."""
    p = steering_residual(scn, traj)
    return min_norm_inverse(scn.resolvent(), scn.theta, p, scn.wq_full, gamma_floor)


def terminal_error(scn: Scenario, traj: RegulatedTrajectory) -> float:
    """||zeta(a) + g(zeta) - zeta1||: the exact-controllability defect."""
    gap = traj.values[-1] + scn.g_of(traj.values) - scn.zeta1
    return float(np.sqrt(gap @ gap))


@dataclass(frozen=True)
class SteeringReport:
    terminal_error: float
    outer_iterations: int
    control_norm: float
    history: tuple
    converged: bool

    def as_lines(self) -> list[str]:
        lines = [
            f"converged={str(self.converged).lower()}",
            f"terminal_error={self.terminal_error:.17g}",
            f"outer_iterations={self.outer_iterations}",
            f"control_norm={self.control_norm:.17g}",
        ]
        lines += [f"history_{i}={e:.17g}" for i, e in enumerate(self.history)]
        return lines


@dataclass(frozen=True, eq=False)
class SteerOutcome:
    control: ControlSignal
    trajectory: RegulatedTrajectory
    report: SteeringReport


def steer(scn: Scenario) -> SteerOutcome:
    """Alternate control synthesis and Picard solves until the target is hit.

    Starts from the uncontrolled solution; each outer pass synthesizes the
    control for the current trajectory and re-solves.  Raises SteeringError
    with the error history when max_outer passes do not reach tol_target.
    """
    traj = picard_solve(scn, None).trajectory
    u = ControlSignal(np.zeros((len(scn.grid), scn.n_modes)))
    history = [terminal_error(scn, traj)]
    outer = 0
    while history[-1] > scn.tol.tol_target:
        if outer >= scn.tol.max_outer:
            raise SteeringError(
                f"terminal error {history[-1]:.3e} after {outer} outer "
                f"iterations (target {scn.tol.tol_target:g})", history)
        u = synthesize_control(scn, traj)
        traj = picard_solve(scn, u.samples).trajectory
        outer += 1
        history.append(terminal_error(scn, traj))
    report = SteeringReport(history[-1], outer, u.l2_norm(scn.wq_full),
                            tuple(history), True)
    return SteerOutcome(u, traj, report)
