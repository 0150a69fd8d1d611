"""Wave-breaking threshold, breaking-time bound, and slope audits.

Everything here is driven by a = ||u0||_{H1} and the most negative
initial slope s0 = min_x u0'(x) (attained at x0).  The key constants:

    psi(u0)  = (sqrt(2)/2) a^3 + a^2/4
    condition: s0 < -sqrt(2 psi)         (slope beats the nonlinearity)
    eps0     = 1 - 2 psi / s0^2          (in (0,1) iff condition holds)
    lambda0  = -eps0 * y(0) / 4          (max dissipation that still breaks)

For lam in [0, lambda0) the solution breaks no later than

    T+ = (1/lam) * ln(eps0*y0 / (eps0*y0 + 4*lam))   (lam > 0)
    T+ = -8 / (eps0 * y0)                            (lam = 0)

Both branches are printed bounds from the source analysis; note the
lam = 0 one is looser by a factor 2 than the lam -> 0+ limit of the
logarithmic branch (-4/(eps0*y0)), so the two do not join continuously.

The minimum slope y(t) = min_x u_x(t, x) obeys the Riccati differential
inequality y' + lam*y <= psi - y^2/2, and u at the minimizing point obeys
|u(t, xi(t))| <= (sqrt(2)/2) e^{-lam t} a; both are audited along
recorded trajectories with finite-difference tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import GridField, sobolev_norm, spectral_derivative


class DegenerateDataError(ValueError):
    """Initial data has no usable slope (constant field)."""


class HypothesisError(ValueError):
    """Requested bound lies outside the breaking theorem's hypotheses."""


@dataclass(frozen=True)
class BreakingForecast:
    """All threshold constants for one initial datum and dissipation lam.

    t_plus is +inf when the hypotheses fail (condition false or lam
    outside [0, lambda0)).  eps0 may be <= 0 for non-breaking data; it is
    reported raw, never clamped, so callers can see the margin.
    """

    a: float
    x0: float
    s0: float
    y0: float
    psi: float
    eps0: float
    lambda0: float
    condition_holds: bool
    lam: float
    t_plus: float

    def as_dict(self) -> dict:
        return {
            "a": self.a, "x0": self.x0, "s0": self.s0, "y0": self.y0,
            "psi": self.psi, "eps0": self.eps0, "lambda0": self.lambda0,
            "condition_holds": self.condition_holds, "lambda": self.lam,
            "t_plus": self.t_plus,
        }


def psi(u0: GridField) -> float:
    """Nonlinearity budget psi(u0) = (sqrt(2)/2) a^3 + a^2/4."""
    a = sobolev_norm(u0, 1.0)
    return 0.5 * math.sqrt(2.0) * a**3 + 0.25 * a * a


def _argmin_slope(u0: GridField) -> tuple[int, float]:
    du = spectral_derivative(u0, 1).values
    j = int(np.argmin(du))  # ties broken by smallest x
    return j, float(du[j])


def min_slope_location(u: GridField, refine: bool = False) -> tuple[float, float, int]:
    """(y, xi, j): grid minimum of u_x, its location, and its index.

    With refine=True a parabola through the minimizing node and its two
    periodic neighbours polishes (y, xi) below grid quantization, which
    de-jitters the y(t) series that the Riccati audit differentiates.
    """
    du = spectral_derivative(u, 1).values
    j = int(np.argmin(du))
    y = float(du[j])
    xi = float(u.grid.x[j])
    if refine:
        dm, d0, dp = du[j - 1], du[j], du[(j + 1) % u.grid.n]
        curv = dm - 2.0 * d0 + dp
        if curv > 0:
            delta = 0.5 * (dm - dp) / curv  # vertex offset in cells
            if abs(delta) <= 1.0:
                y = float(d0 - 0.125 * (dp - dm) ** 2 / curv)
                xi = float(xi + delta * u.grid.dx)
    return y, xi, j


def epsilon0(u0: GridField) -> float:
    """Slope-excess fraction eps0 = 1 - (2 sqrt(2) a^3 + a^2) / (2 s0^2).

    s0 is u0' at the global minimizer of the slope.  Positive (and then
    automatically in (0,1)) exactly when the breaking condition holds;
    reported unclamped otherwise.
    """
    scale = max(1.0, float(np.max(np.abs(u0.values))))
    j, s0 = _argmin_slope(u0)
    if abs(s0) < 1e-13 * scale:
        raise DegenerateDataError("degenerate: constant initial data")
    a = sobolev_norm(u0, 1.0)
    return 1.0 - (2.0 * math.sqrt(2.0) * a**3 + a * a) / (2.0 * s0 * s0)


def t_plus(eps0: float, y0: float, lam: float) -> float:
    """Upper bound on the breaking time for admissible (eps0, y0, lam).

    Requires eps0 in (0,1), y0 < 0 and lam in [0, lambda0) with
    lambda0 = -eps0*y0/4.  lam = 0 gives -8/(eps0*y0); lam > 0 the
    logarithmic branch.
    """
    if not (0.0 < eps0 < 1.0):
        raise HypothesisError("condition (threshold) violated: eps0 not in (0,1)")
    if not (y0 < 0.0):
        raise HypothesisError("y(0) must be negative")
    lambda0 = -eps0 * y0 / 4.0
    if lam < 0.0 or lam >= lambda0:
        raise HypothesisError("outside breaking hypothesis: lam not in [0, lambda0)")
    if lam == 0.0:
        return -8.0 / (eps0 * y0)
    return math.log(eps0 * y0 / (eps0 * y0 + 4.0 * lam)) / lam


def forecast(u0: GridField, lam: float) -> BreakingForecast:
    """Assemble the full breaking forecast for initial data u0.

    Raises DegenerateDataError for constant (slope-free) data.  When the
    threshold condition fails, or lam >= lambda0, t_plus is +inf.
    """
    scale = max(1.0, float(np.max(np.abs(u0.values))))
    j, s0 = _argmin_slope(u0)
    if abs(s0) < 1e-13 * scale:
        raise DegenerateDataError("degenerate: constant initial data")
    a = sobolev_norm(u0, 1.0)
    p = 0.5 * math.sqrt(2.0) * a**3 + 0.25 * a * a
    eps = 1.0 - 2.0 * p / (s0 * s0)
    condition = s0 < -math.sqrt(2.0 * p)
    lambda0 = -eps * s0 / 4.0
    bound = math.inf
    if condition and 0.0 <= lam < lambda0:
        bound = t_plus(eps, s0, lam)
    return BreakingForecast(
        a=a, x0=float(u0.grid.x[j]), s0=s0, y0=s0, psi=p, eps0=eps,
        lambda0=lambda0, condition_holds=condition, lam=lam, t_plus=bound,
    )


def track_min_slope(trajectory) -> np.ndarray:
    """(t, y(t), xi(t)) rows for every recorded snapshot."""
    return np.column_stack([
        np.asarray(trajectory.times),
        np.asarray(trajectory.min_slope),
        np.asarray(trajectory.xi),
    ])


@dataclass
class RiccatiAudit:
    """Interior-point audit of y' + lam*y + y^2/2 - psi <= 0.

    violation: the left side with y' from centered differences;
    tol: finite-difference error allowance C*dt^2*|y'''| + 1e-6;
    max_violation: max of violation (the audited quantity);
    max_excess: max of violation - tol (<= 0 means compliant).
    """

    times: np.ndarray
    violation: np.ndarray
    tol: np.ndarray
    max_violation: float
    max_excess: float

    @property
    def compliant(self) -> bool:
        return self.max_excess <= 0.0


def riccati_audit(times, y, lam: float, psi_value: float) -> RiccatiAudit:
    """Audit the minimum-slope Riccati inequality along a record series.

    y' is formed by centered differences at record cadence (the slope is
    only a.e. differentiable, so the audit carries a tolerance): the
    allowance is 0.5*dt^2*|y'''| (a third-difference estimate, padded
    well beyond the 1/6 Taylor constant) plus 1e-6 absolute.
    """
    t = np.asarray(times, dtype=float)
    yv = np.asarray(y, dtype=float)
    if t.size < 3:
        raise ValueError("need at least 3 record points")
    dy = _centered_derivative(t, yv)
    y3 = _third_derivative_estimate(t, yv)
    dt_loc = 0.5 * (t[2:] - t[:-2])
    interior = slice(1, -1)
    violation = dy + lam * yv[interior] + 0.5 * yv[interior] ** 2 - psi_value
    tol = 0.5 * dt_loc**2 * np.abs(y3) + 1e-6
    excess = violation - tol
    return RiccatiAudit(
        times=t[interior], violation=violation, tol=tol,
        max_violation=float(np.max(violation)), max_excess=float(np.max(excess)),
    )


def _centered_derivative(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Three-point derivative at interior nodes of a possibly uneven grid."""
    h1 = t[1:-1] - t[:-2]
    h2 = t[2:] - t[1:-1]
    return (
        -h2 / (h1 * (h1 + h2)) * y[:-2]
        + (h2 - h1) / (h1 * h2) * y[1:-1]
        + h1 / (h2 * (h1 + h2)) * y[2:]
    )


def _third_derivative_estimate(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    """|y'''| proxy at interior nodes via repeated np.gradient."""
    g3 = np.gradient(np.gradient(np.gradient(y, t), t), t)
    return np.abs(g3[1:-1])


def pointwise_bound_excess(trajectory, a0: float, lam: float) -> np.ndarray:
    """|u(t, xi(t))| - (sqrt(2)/2) e^{-lam t} a0 per record (<= 0 expected)."""
    t = np.asarray(trajectory.times)
    u_xi = np.abs(np.asarray(trajectory.u_at_xi))
    return u_xi - 0.5 * math.sqrt(2.0) * np.exp(-lam * t) * a0


def fit_growth_envelope(times, norms) -> tuple[float, np.ndarray]:
    """One-sided affine envelope of log(norms): log n(t) <= log n(0) + kappa t.

    kappa is the maximal secant slope from the initial record, so the
    residuals log n(t) - (log n(0) + kappa t) are <= 0 by construction;
    they are returned for inspection.  Used as the no-blow-up monitor:
    a finite kappa certifies at-most-exponential growth of ||m||_{H1}.
    """
    t = np.asarray(times, dtype=float)
    n = np.asarray(norms, dtype=float)
    if t.size < 2:
        raise ValueError("need at least 2 records")
    if np.any(n <= 0):
        raise ValueError("norms must be positive")
    logn = np.log(n)
    slopes = (logn[1:] - logn[0]) / (t[1:] - t[0])
    kappa = float(np.max(slopes))
    residuals = logn - (logn[0] + kappa * t)
    return kappa, residuals
