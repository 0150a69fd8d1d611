"""Elliptic special functions and periodic traveling-wave construction.

Complete integrals K(k), E(k) use the arithmetic-geometric mean; the
Jacobi functions sn, cn, dn use the classic descending-Landen / AGM
back-recursion (Bulirsch's sncndn).  Throughout, k is the *modulus*
(k^2 is the parameter m some libraries take).

Traveling waves u(t,x) = phi(x - c t) of the lam = 0 equation satisfy
the first integral

    B(z) = c*(phi - phi'') - phi^3 + (phi')^2/2 + phi*phi'' = A  (const),

and the periodic branch has the square-snoidal shape

    phi(z) = alpha + beta * sn^2(2 K(k) z / L; k),

equivalently a + b*(dn^2(2 K(k) z/L; k) - E(k)/K(k)) with mean a.
fit_traveling_wave recovers (alpha, beta, c, A) for given (L, k) by
collocating B at several z and Newton-solving for exact constancy.

Substituting the ansatz makes B a cubic polynomial in X = sn^2 whose
X^1..X^3 coefficients must vanish; that pins beta = 8 k^2 (2K/L)^2 and
leaves a quadratic for alpha (two discrete branches, each with a fixed
profile mean).  A requested mean level therefore only *selects* the
nearer branch; it is not an extra degree of freedom.  The dissipative
(lam != 0) equation has no steady waves of this form at all: the first
integral only exists for lam = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .spectral import GridField, PeriodicGrid, spectral_derivative

_AGM_DEPTH = 18  # quadratic convergence: 2^18-fold digit doubling headroom


class NoWaveError(RuntimeError):
    """Collocation root-finding found no traveling wave."""


class DegenerateWaveError(ValueError):
    """Requested wave degenerates to a constant (k = 0 or beta = 0)."""


def _check_modulus(k: float) -> float:
    k = float(k)
    if not (0.0 <= k < 1.0):
        raise ValueError(f"elliptic modulus must lie in [0, 1), got {k}")
    return k


def complete_K(k: float) -> float:
    """Complete elliptic integral of the first kind, AGM evaluation."""
    k = _check_modulus(k)
    a, b = 1.0, math.sqrt(1.0 - k * k)
    for _ in range(_AGM_DEPTH):
        if a == b:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (2.0 * a)


def complete_E(k: float) -> float:
    """Complete elliptic integral of the second kind.

    E = K * (1 - sum_{n>=0} 2^{n-1} c_n^2) with c_0 = k and
    c_{n+1} = (a_n - b_n)/2 along the AGM chain.
    """
    k = _check_modulus(k)
    a, b = 1.0, math.sqrt(1.0 - k * k)
    csum = 0.5 * k * k
    power = 0.5
    for _ in range(_AGM_DEPTH):
        if a == b:
            break
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        power *= 2.0
        csum += power * c * c
    K = math.pi / (2.0 * a)
    return K * (1.0 - csum)


def jacobi_sn_cn_dn(u, k: float):
    """Jacobi sn, cn, dn at argument u (scalar or array), modulus k.

    Descending-Landen/AGM back-recursion; all three functions are
    computed from the chain, none via the algebraic identities (those
    stay available as independent checks).
    """
    k = _check_modulus(k)
    u_in = np.asarray(u, dtype=float)
    scalar = u_in.ndim == 0
    uu = np.atleast_1d(u_in).copy()

    m = k * k
    if m == 0.0:
        sn, cn, dn = np.sin(uu), np.cos(uu), np.ones_like(uu)
    else:
        # forward AGM chain (fixed depth; the map is a stable fixed point
        # once converged, so running past convergence is harmless)
        em = np.empty(_AGM_DEPTH)
        en = np.empty(_AGM_DEPTH)
        a, emc = 1.0, 1.0 - m
        c = a
        for i in range(_AGM_DEPTH):
            em[i] = a
            emc = math.sqrt(emc)
            en[i] = emc
            c = 0.5 * (a + emc)
            emc *= a
            a = c
        phi = c * uu
        sn = np.sin(phi)
        cn = np.cos(phi)
        dn = np.ones_like(uu)
        nonzero = sn != 0.0
        if np.any(nonzero):
            s = sn[nonzero]
            av = cn[nonzero] / s
            cv = av * c
            dnv = np.ones_like(av)
            for i in range(_AGM_DEPTH - 1, -1, -1):
                b = em[i]
                av = cv * av
                cv = dnv * cv
                dnv = (en[i] + av) / (b + av)
                av = cv / b
            av = 1.0 / np.sqrt(cv * cv + 1.0)
            sn_new = np.where(s >= 0.0, av, -av)
            sn[nonzero] = sn_new
            cn[nonzero] = cv * sn_new
            dn[nonzero] = dnv
    if scalar:
        return float(sn[0]), float(cn[0]), float(dn[0])
    return sn, cn, dn


@dataclass(frozen=True)
class WaveParams:
    """Parameters of one periodic traveling wave.

    form is "snoidal" (offset=alpha, amplitude=beta multiplying sn^2) or
    "dnoidal" (offset=a, amplitude=b multiplying dn^2 - E/K; the offset
    then equals the profile mean).  c is the wave speed, A the constant
    value of the first-integral bracket, L the profile period.
    """

    form: str
    offset: float
    amplitude: float
    k: float
    L: float
    c: float
    A: float

    def mean(self) -> float:
        """Profile mean over one period."""
        K, E = complete_K(self.k), complete_E(self.k)
        if self.form == "snoidal":
            if self.k == 0.0:
                return self.offset + 0.5 * self.amplitude
            return self.offset + self.amplitude * (K - E) / (self.k * self.k * K)
        return self.offset

    def as_dict(self) -> dict:
        return {
            "form": self.form, "offset": self.offset,
            "amplitude": self.amplitude, "k": self.k, "L": self.L,
            "c": self.c, "A": self.A, "mean": self.mean(),
        }


def to_dnoidal(p: WaveParams) -> WaveParams:
    """Rewrite a snoidal wave via k^2 sn^2 + dn^2 = 1.

    b = -beta/k^2 and a = alpha + (beta/k^2)(1 - E/K); the profiles agree
    pointwise and a is the mean.
    """
    if p.form == "dnoidal":
        return p
    if p.k == 0.0:
        raise DegenerateWaveError("k = 0 snoidal wave has no dnoidal rewrite")
    K, E = complete_K(p.k), complete_E(p.k)
    ratio = p.amplitude / (p.k * p.k)
    return replace(p, form="dnoidal", offset=p.offset + ratio * (1.0 - E / K),
                   amplitude=-ratio)


def _profile_terms(z, k: float, L: float):
    """phi building blocks at z for unit beta: X = sn^2, and the per-beta
    first and second derivative factors P1, P2 (phi' = beta*P1 etc.)."""
    K = complete_K(k)
    w = 2.0 * K / L
    sn, cn, dn = jacobi_sn_cn_dn(w * np.asarray(z, dtype=float), k)
    X = sn * sn
    P1 = 2.0 * w * sn * cn * dn
    c2d2 = (cn * dn) ** 2
    P2 = 2.0 * w * w * (c2d2 - X * dn * dn - k * k * X * cn * cn)
    return X, P1, P2


def wave_profile(p: WaveParams, z) -> np.ndarray:
    """Sample the wave profile phi(z)."""
    K = complete_K(p.k)
    arg = 2.0 * K * np.asarray(z, dtype=float) / p.L
    sn, cn, dn = jacobi_sn_cn_dn(arg, p.k)
    if p.form == "snoidal":
        return p.offset + p.amplitude * sn * sn
    E = complete_E(p.k)
    return p.offset + p.amplitude * (dn * dn - E / K)


def snoidal_profile(p: WaveParams, grid: PeriodicGrid) -> GridField:
    """Sample the wave on a periodic grid whose box holds an integer
    number of wave periods."""
    ratio = grid.length / p.L
    if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
        raise ValueError(
            f"incommensurate L: box {grid.length} is not an integer "
            f"multiple of the wave period {p.L}")
    return GridField(grid, wave_profile(p, grid.x))


def first_integral_series(phi: GridField, c: float) -> GridField:
    """Pointwise bracket B(z) = c*(phi - phi'') - phi^3 + (phi')^2/2
    + phi*phi'' (spectral derivatives).  Constancy of B certifies a
    traveling-wave profile with speed c."""
    phi.require_finite()
    d1 = spectral_derivative(phi, 1).values
    d2 = spectral_derivative(phi, 2).values
    v = phi.values
    return phi.with_values(c * (v - d2) - v**3 + 0.5 * d1 * d1 + v * d2)


def _collocation_residual(v, X, P1, P2):
    """Residual B(z_i) - A and its Jacobian for unknowns v=(alpha, beta, c, A)."""
    alpha, beta, c, A = v
    phi = alpha + beta * X
    dphi2 = (beta * P1) ** 2
    ddphi = beta * P2
    B = c * (phi - ddphi) - phi**3 + 0.5 * dphi2 + phi * ddphi
    r = B - A
    dB_dalpha = c - 3.0 * phi**2 + ddphi
    dB_dbeta = c * (X - P2) - 3.0 * phi**2 * X + beta * P1**2 + X * ddphi + phi * P2
    dB_dc = phi - ddphi
    J = np.column_stack([dB_dalpha, dB_dbeta, dB_dc, -np.ones_like(X)])
    return r, J


def _newton_polish(v0, X, P1, P2, max_iter=60):
    v = np.array(v0, dtype=float)
    r, J = _collocation_residual(v, X, P1, P2)
    best = float(np.max(np.abs(r)))
    for _ in range(max_iter):
        delta, *_ = np.linalg.lstsq(J, -r, rcond=None)
        step = 1.0
        while step > 1e-6:
            cand = v + step * delta
            rc, Jc = _collocation_residual(cand, X, P1, P2)
            if float(np.max(np.abs(rc))) < best:
                v, r, J = cand, rc, Jc
                best = float(np.max(np.abs(rc)))
                break
            step *= 0.5
        else:
            break
        if best < 1e-14:
            break
    return v, best


def fit_traveling_wave(L: float, k: float, mean_level: float | None = None,
                       tol: float = 1e-10) -> WaveParams:
    """Find a snoidal traveling wave of period L and modulus k.

    Collocates the first-integral bracket at six z values and damped-
    Newton solves for (alpha, beta, c, A) from a fixed deterministic grid
    of starts.  For admissible (L, k) there are exactly two branches;
    mean_level picks the branch whose (fixed) mean is nearer, otherwise
    the larger-alpha branch is returned.  Raises NoWaveError when no
    start converges below tol (e.g. k too close to 1 for the period).
    """
    if L <= 0:
        raise ValueError("period L must be positive")
    k = _check_modulus(k)
    if k == 0.0:
        raise DegenerateWaveError(
            "k = 0 forces beta = 0: constant profile with unconstrained speed")
    K = complete_K(k)
    w2 = (2.0 * K / L) ** 2
    zs = L * np.array([0.055, 0.11, 0.17, 0.23, 0.31, 0.42])
    X, P1, P2 = _profile_terms(zs, k, L)

    scale = max(1.0, w2)
    alpha_starts = scale * np.array([-4.0, -2.5, -1.5, -1.0, -0.5, 0.5, 1.5])
    beta_starts = w2 * np.array([1.0, 4.0, 10.0])
    roots = []
    best_seen = math.inf
    for a0 in alpha_starts:
        for b0 in beta_starts:
            v0 = (a0, b0, 1.0, 0.0)
            v, res = _newton_polish(v0, X, P1, P2)
            best_seen = min(best_seen, res)
            if res <= tol * scale**3 and abs(v[1]) > 1e-8 * scale:
                if not any(np.allclose(v[:3], r[:3], rtol=1e-6, atol=1e-9)
                           for r in roots):
                    roots.append(v)
    if not roots:
        raise NoWaveError(
            f"no wave at these (L={L}, k={k}, mean={mean_level}); "
            f"best collocation residual {best_seen:.3e}")

    params = [WaveParams(form="snoidal", offset=v[0], amplitude=v[1], k=k,
                         L=L, c=v[2], A=v[3]) for v in roots]
    if mean_level is None:
        return max(params, key=lambda p: p.offset)
    return min(params, key=lambda p: abs(p.mean() - mean_level))
