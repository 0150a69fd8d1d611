"""Explicit RK4 time integration with CFL-adaptive steps.

The nonlocal form is non-stiff (the inverse Helmholtz multiplier smooths
every nonlinear term), so the step restriction is purely advective:

    dt = min(dt_max, cfl * dx / max(|u|_inf, eps))

Wave breaking is a gradient event: the amplitude stays bounded (that is
the point of the breaking scenario) while min_x u_x dives.  An
amplitude-based CFL step therefore cannot collapse during the faithful
phase of a breaking run, so the integrator watches the minimum slope
every step and stops with breaking_detected the moment it passes
-slope_ceiling.  The secondary route -- dt underflowing dt_min while the
slope is past the ceiling (amplitude blow-up after resolution is lost)
-- also yields the breaking verdict; dt underflow without the slope
evidence is reported as an inconclusive numerical failure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .breaking import min_slope_location
from .equation import EquationParams, rhs
from .invariants import h0, h1, h_energy
from .spectral import (
    GridField,
    NonFiniteFieldError,
    helmholtz_apply,
    sobolev_norm,
    spectral_derivative,
)

TERMINATION_COMPLETED = "completed"
TERMINATION_BREAKING = "breaking_detected"
TERMINATION_NONFINITE = "nonfinite"

_CFL_FLOOR = 1e-12  # |u| floor in the CFL denominator


@dataclass(frozen=True)
class StepControl:
    """Step-size and termination policy for integrate().

    fixed_dt, when set, bypasses the CFL formula (used by convergence
    studies); dt_min underflow is the breaking sentinel; slope_ceiling is
    the |min u_x| threshold that upgrades an underflow to a breaking
    verdict; record_every is the diagnostic cadence in simulation time.
    """

    t_end: float
    cfl: float = 0.3
    dt_max: float = 0.05
    dt_min: float = 1e-9
    record_every: float = 0.05
    dealias: bool = True
    slope_ceiling: float = 1e3
    fixed_dt: float | None = None
    refine_min_slope: bool = False

    def __post_init__(self):
        if not (self.t_end > 0):
            raise ValueError("t_end must be positive")
        if not (0 < self.cfl <= 1):
            raise ValueError("cfl must lie in (0, 1]")
        if not (0 < self.dt_min < self.dt_max):
            raise ValueError("need 0 < dt_min < dt_max")
        if self.record_every <= 0:
            raise ValueError("record_every must be positive")
        if self.fixed_dt is not None and self.fixed_dt <= 0:
            raise ValueError("fixed_dt must be positive")


@dataclass
class Trajectory:
    """Recorded history of one integration.

    Diagnostics are sampled at the record cadence (plus the final state):
    min slope y and its location xi, u at xi, the three invariants, the
    H1 norm of u and of m = u - u_xx.  termination is one of completed |
    breaking_detected | nonfinite; reason carries the low-level cause.
    """

    grid_length: float
    lam: float
    times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    min_slope: list = field(default_factory=list)
    xi: list = field(default_factory=list)
    u_at_xi: list = field(default_factory=list)
    inv_h0: list = field(default_factory=list)
    inv_h: list = field(default_factory=list)
    inv_h1: list = field(default_factory=list)
    u_h1_norm: list = field(default_factory=list)
    m_h1_norm: list = field(default_factory=list)
    termination: str = TERMINATION_COMPLETED
    reason: str = ""

    def record(self, t: float, u: GridField, refine: bool = False) -> None:
        y, xi, j = min_slope_location(u, refine)
        self.times.append(float(t))
        self.snapshots.append(u)
        self.min_slope.append(y)
        self.xi.append(xi)
        self.u_at_xi.append(float(u.values[j]))
        self.inv_h0.append(h0(u))
        self.inv_h.append(h_energy(u))
        self.inv_h1.append(h1(u))
        self.u_h1_norm.append(sobolev_norm(u, 1.0))
        self.m_h1_norm.append(sobolev_norm(helmholtz_apply(u), 1.0))

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final_time(self) -> float:
        return self.times[-1] if self.times else 0.0

    @property
    def final_state(self) -> GridField:
        return self.snapshots[-1]


def step_rk4(u: GridField, dt: float, p: EquationParams, dealias: bool = True) -> GridField:
    """One classical RK4 step of u_t = rhs(u)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    k1 = rhs(u, p, dealias)
    k2 = rhs(u + (0.5 * dt) * k1, p, dealias)
    k3 = rhs(u + (0.5 * dt) * k2, p, dealias)
    k4 = rhs(u + dt * k3, p, dealias)
    return u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _boundary_decay_ok(u: GridField, tol: float = 1e-10) -> bool:
    scale = max(1.0, float(np.max(np.abs(u.values))))
    edge = max(abs(u.values[0]), abs(u.values[-1]))
    return edge <= tol * scale


def integrate(u0: GridField, p: EquationParams, ctl: StepControl, warn=None) -> Trajectory:
    """Integrate u_t = rhs(u) from u0 and record diagnostics.

    Steps with the CFL-limited dt (or ctl.fixed_dt), clipping the last
    step to land on t_end exactly.  The minimum slope is checked every
    step.  Termination:

    * completed         -- reached t_end;
    * breaking_detected -- min u_x passed -slope_ceiling (primary slope
                           event), or dt underflowed dt_min with the
                           slope past the ceiling;
    * nonfinite         -- NaN/Inf appeared, or dt underflowed without
                           the slope evidence (inconclusive failure).
    """
    u0.require_finite()
    if warn is not None and not _boundary_decay_ok(u0):
        warn("initial data does not decay at the box boundary; "
             "the periodic truncation of the real line is inaccurate")
    dx = u0.grid.dx
    traj = Trajectory(grid_length=u0.grid.length, lam=p.lam)
    t, u = 0.0, u0
    traj.record(t, u, ctl.refine_min_slope)
    next_record = ctl.record_every

    def finish(code, why, record_state=True):
        if record_state and (not traj.times or traj.times[-1] < t):
            traj.record(t, u, ctl.refine_min_slope)
        traj.termination = code
        traj.reason = why
        return traj

    while t < ctl.t_end:
        if ctl.fixed_dt is not None:
            dt = ctl.fixed_dt
        else:
            umax = float(np.max(np.abs(u.values)))
            dt = min(ctl.dt_max, ctl.cfl * dx / max(umax, _CFL_FLOOR))
            if dt < ctl.dt_min:
                slope = float(np.min(spectral_derivative(u, 1).values))
                if slope < -ctl.slope_ceiling:
                    return finish(TERMINATION_BREAKING, "dt underflow with slope past ceiling")
                return finish(TERMINATION_NONFINITE, "dt underflow (inconclusive)")
        dt = min(dt, ctl.t_end - t)
        try:
            u_new = step_rk4(u, dt, p, ctl.dealias)
        except NonFiniteFieldError:
            return finish(TERMINATION_NONFINITE, "non-finite field during step")
        if not u_new.is_finite():
            return finish(TERMINATION_NONFINITE, "non-finite field after step")
        t += dt
        u = u_new
        slope_now = float(np.min(spectral_derivative(u, 1).values))
        if slope_now < -ctl.slope_ceiling:
            return finish(TERMINATION_BREAKING, "slope passed ceiling")
        if t + 1e-12 >= next_record and t < ctl.t_end:
            traj.record(t, u, ctl.refine_min_slope)
            next_record += ctl.record_every

    return finish(TERMINATION_COMPLETED, "reached t_end")
