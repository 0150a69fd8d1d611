"""Conserved quantities and drift auditing.

For lam = 0 the flow conserves

    H0 = int u dx
    H  = (1/2) int (u^2 + u_x^2) dx
    H1 = int (u^4/4 + u u_x^2 / 2) dx

For lam != 0 only two survive, as exponentially weighted quantities:
e^{lam t} * H0(u(t)) and e^{2 lam t} * H(u(t)) are constant, so the
physical integrals decay like e^{-lam t} and e^{-2 lam t}.  (The source
material prints the weights with the opposite sign, but its own
divergence identities and the estimates it builds on them use the
growing weights; conservation only holds this way round.)

The audit measures the relative drift of each quantity along a recorded
trajectory against its t = 0 value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import GridField, quadrature, spectral_derivative

DRIFT_FLOOR = 1e-14  # |value(0)| floor so exactly-zero invariants divide safely


def h0(u: GridField) -> float:
    """Mass-like invariant: integral of u."""
    return quadrature(u)


def h_energy(u: GridField) -> float:
    """Energy: half the integral of u^2 + u_x^2 (half the squared H1 norm)."""
    ux = spectral_derivative(u, 1)
    return 0.5 * (quadrature(u * u) + quadrature(ux * ux))


def h1(u: GridField) -> float:
    """Higher invariant: integral of u^4/4 + u u_x^2 / 2 (lam = 0 only)."""
    ux = spectral_derivative(u, 1)
    v, vx = u.values, ux.values
    return quadrature(u.with_values(0.25 * v**4 + 0.5 * v * vx * vx))


def weighted_invariants(u: GridField, t: float, lam: float) -> tuple[float, float]:
    """The two lam != 0 conserved quantities evaluated at time t:

        (e^{lam t} * H0(u), e^{2 lam t} * H(u))

    At t = 0 they reduce to (h0, h_energy).  Constant along exact
    solutions for any lam (including lam = 0, where all weights are 1).
    """
    return math.exp(lam * t) * h0(u), math.exp(2.0 * lam * t) * h_energy(u)


@dataclass
class InvariantReport:
    """Per-quantity time series and max relative drift along a trajectory.

    Quantity ids: H0, H, H1 for lam = 0 runs; H0w, Hw (weighted) for
    lam != 0.  Drift is |value(t) - value(0)| / max(|value(0)|, floor).
    """

    lam: float
    times: np.ndarray
    series: dict
    max_drift: dict

    def worst(self) -> float:
        return max(self.max_drift.values())


def _drift(series: np.ndarray) -> float:
    ref = series[0]
    return float(np.max(np.abs(series - ref)) / max(abs(ref), DRIFT_FLOOR))


def audit(trajectory, lam: float) -> InvariantReport:
    """Evaluate the conserved set along a recorded trajectory.

    lam = 0: audits {H0, H, H1}.  lam != 0: audits the weighted pair
    {H0w, Hw}.  Raises on an empty trajectory.
    """
    if len(trajectory.times) == 0:
        raise ValueError("empty trajectory")
    times = np.asarray(trajectory.times)
    if lam == 0.0:
        series = {
            "H0": np.asarray(trajectory.inv_h0),
            "H": np.asarray(trajectory.inv_h),
            "H1": np.asarray(trajectory.inv_h1),
        }
    else:
        w1 = np.exp(lam * times)
        w2 = np.exp(2.0 * lam * times)
        series = {
            "H0w": w1 * np.asarray(trajectory.inv_h0),
            "Hw": w2 * np.asarray(trajectory.inv_h),
        }
    drift = {name: _drift(vals) for name, vals in series.items()}
    return InvariantReport(lam=lam, times=times, series=series, max_drift=drift)
