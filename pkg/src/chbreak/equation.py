"""The dissipative Camassa-Holm-type equation.

Local form:

    u_t - u_txx + lam*(u - u_xx) + 3 u^2 u_x = u u_xxx + 2 u_x u_xx

Applying (1 - d^2/dx^2)^{-1} turns it into the nonlocal evolution

    u_t = -u u_x - d/dx (1-d^2/dx^2)^{-1} (u^2 + u_x^2/2 + h(u)) - lam*u

with h(u) = u^3 - 1.5 u^2, which is what the solver integrates: the
inverse Helmholtz multiplier smooths the nonlinearity, so the only
stiffness left is advective.

First-order (momentum) form, m = u - u_xx:

    m_t + u m_x + 2 u_x m + lam*m + d/dx h(u) = 0

The two residual evaluators certify, on any pair (u, u_t), that the
local and momentum statements agree with the nonlocal right-hand side.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import (
    GridField,
    NonFiniteFieldError,
    dealias_filter,
    helmholtz_inverse,
    spectral_derivative,
)


@dataclass(frozen=True)
class EquationParams:
    """Equation coefficients; lam is the dissipation constant."""

    lam: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.lam):
            raise ValueError("lam must be finite")


def nonlinearity_h(u: GridField) -> GridField:
    """Pointwise h(u) = u^3 - 1.5 u^2.  h(0) = 0."""
    u.require_finite()
    v = u.values
    return u.with_values(v * v * (v - 1.5))


def rhs(u: GridField, p: EquationParams, dealias: bool = True) -> GridField:
    """Time derivative of u in the nonlocal form.

        u_t = -u u_x - d/dx (1-d^2/dx^2)^{-1} q - lam*u,
        q   = u^2 + u_x^2/2 + h(u)

    The three smoothed terms are fused into one transform of q (linear
    operator, so identical to applying it term by term).  With dealias
    the 2/3-rule mask is applied to u before products and to the products
    themselves; the linear -lam*u term is never filtered.
    """
    u.require_finite()
    un = dealias_filter(u) if dealias else u
    ux = spectral_derivative(un, 1)
    v, vx = un.values, ux.values
    q = un.with_values(v * v + 0.5 * vx * vx + v * v * (v - 1.5))
    adv = un.with_values(v * vx)
    if dealias:
        q = dealias_filter(q)
        adv = dealias_filter(adv)
    out = -adv - spectral_derivative(helmholtz_inverse(q), 1) - p.lam * u
    if not out.is_finite():
        raise NonFiniteFieldError("blow-up detected in RHS")
    return out


def residual_local_form(u: GridField, u_t: GridField, p: EquationParams) -> GridField:
    """Pointwise residual of the local form given u and its time derivative.

        r = u_t - u_txx + lam*(u - u_xx) + 3 u^2 u_x - u u_xxx - 2 u_x u_xx

    r ~ 0 (to spectral accuracy) when u_t comes from the nonlocal rhs,
    which is the numerical content of the claimed equivalence.
    """
    u.require_finite()
    u_t.require_finite()
    ux = spectral_derivative(u, 1).values
    uxx = spectral_derivative(u, 2).values
    uxxx = spectral_derivative(u, 3).values
    utxx = spectral_derivative(u_t, 2).values
    v = u.values
    r = (
        u_t.values
        - utxx
        + p.lam * (v - uxx)
        + 3.0 * v * v * ux
        - v * uxxx
        - 2.0 * ux * uxx
    )
    return u.with_values(r)


def residual_m_form(u: GridField, u_t: GridField, p: EquationParams) -> GridField:
    """Pointwise residual of the momentum form, m = u - u_xx.

        r = m_t + u m_x + 2 u_x m + lam*m + d/dx h(u)

    Algebraically identical to residual_local_form (expand m and
    collect), so the two evaluators must agree to round-off.
    """
    u.require_finite()
    u_t.require_finite()
    m = (u - spectral_derivative(u, 2)).values
    m_t = (u_t - spectral_derivative(u_t, 2)).values
    m_x = (spectral_derivative(u, 1) - spectral_derivative(u, 3)).values
    ux = spectral_derivative(u, 1).values
    hx = spectral_derivative(nonlinearity_h(u), 1).values
    r = m_t + u.values * m_x + 2.0 * ux * m + p.lam * m + hx
    return u.with_values(r)
