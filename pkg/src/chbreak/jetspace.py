"""Exact off-shell verification of conserved currents in jet space.

A differential expression is a finite sum of terms

    coeff * e^{mu*lam*t} * prod_J u_J^{p_J}

with exact rational coeff, integer weight mu in {0,1,2}, and jet
coordinates u_J indexed by the multi-index J = (nt, nx) meaning
d^{nt+nx} u / dt^{nt} dx^{nx} (mixed derivatives symmetrized, so the
order of t/x differentiation never matters).  Jet coordinates are
mutually independent: identities proved here hold *off shell*, for
arbitrary coordinate values, not just on solutions.

Total derivatives raise indices by the chain rule:

    D_t: u_J -> u_{J+(1,0)},    D_x: u_J -> u_{J+(0,1)},

plus mu*lam times the term itself for D_t of the exponential weight.

A pair (C0, C1) is a conserved current with characteristic phi for the
equation expression F when

    D_t C0 + D_x C1 - phi * F == 0

identically; symbolic_cancellation computes that combination in exact
arithmetic (it must normalize to the empty expression) and
divergence_residual spot-checks it in floating point at numeric jet
points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

Coord = tuple[int, int]  # (nt, nx)

_BASE_NAMES = {
    (0, 0): "u", (1, 0): "u_t", (0, 1): "u_x", (1, 1): "u_tx",
    (0, 2): "u_xx", (1, 2): "u_txx", (0, 3): "u_xxx", (2, 0): "u_tt",
    (2, 1): "u_ttx", (1, 3): "u_txxx", (0, 4): "u_xxxx",
}


def coord_name(c: Coord) -> str:
    if c in _BASE_NAMES:
        return _BASE_NAMES[c]
    return "u_" + "t" * c[0] + "x" * c[1]


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)  # exact binary value
    raise TypeError(f"cannot use {type(x).__name__} as an exact coefficient")


class DiffExpr:
    """Immutable differential expression with exact rational coefficients.

    terms: mapping (mu, monomial) -> Fraction, monomial a sorted tuple of
    ((nt, nx), power).  lam is the bound rational dissipation constant
    (it only acts through d/dt e^{mu*lam*t} = mu*lam * e^{mu*lam*t}).
    """

    __slots__ = ("lam", "terms")

    def __init__(self, lam=0, terms=None):
        lam = _as_fraction(lam)
        object.__setattr__(self, "lam", lam)
        clean = {}
        for (mu, mon), coeff in (terms or {}).items():
            coeff = _as_fraction(coeff)
            if lam == 0:
                mu = 0  # e^{mu*0*t} = 1: fold into the unweighted bucket
            if coeff != 0:
                key = (mu, mon)
                clean[key] = clean.get(key, Fraction(0)) + coeff
                if clean[key] == 0:
                    del clean[key]
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):
        raise AttributeError("DiffExpr is immutable")

    # -- constructors -------------------------------------------------
    @classmethod
    def constant(cls, value, lam=0) -> "DiffExpr":
        return cls(lam, {(0, ()): _as_fraction(value)})

    @classmethod
    def var(cls, coord: Coord, lam=0) -> "DiffExpr":
        return cls(lam, {(0, ((tuple(coord), 1),)): Fraction(1)})

    @classmethod
    def exp_weight(cls, mu: int, lam=0) -> "DiffExpr":
        """The bare factor e^{mu*lam*t}."""
        return cls(lam, {(int(mu), ()): Fraction(1)})

    # -- algebra ------------------------------------------------------
    def _check_lam(self, other: "DiffExpr"):
        if self.lam != other.lam:
            raise ValueError("cannot combine expressions with different lam")

    def __add__(self, other):
        if not isinstance(other, DiffExpr):
            other = DiffExpr.constant(other, self.lam)
        self._check_lam(other)
        out = dict(self.terms)
        for key, coeff in other.terms.items():
            out[key] = out.get(key, Fraction(0)) + coeff
        return DiffExpr(self.lam, out)

    __radd__ = __add__

    def __neg__(self):
        return DiffExpr(self.lam, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, DiffExpr):
            other = DiffExpr.constant(other, self.lam)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, DiffExpr):
            c = _as_fraction(other)
            return DiffExpr(self.lam, {k: c * v for k, v in self.terms.items()})
        self._check_lam(other)
        out = {}
        for (mu1, mon1), c1 in self.terms.items():
            for (mu2, mon2), c2 in other.terms.items():
                powers = dict(mon1)
                for coord, p in mon2:
                    powers[coord] = powers.get(coord, 0) + p
                key = (mu1 + mu2, tuple(sorted(powers.items())))
                out[key] = out.get(key, Fraction(0)) + c1 * c2
        return DiffExpr(self.lam, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("only nonnegative integer powers")
        out = DiffExpr.constant(1, self.lam)
        for _ in range(n):
            out = out * self
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return (isinstance(other, DiffExpr) and self.lam == other.lam
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.lam, tuple(sorted(self.terms.items()))))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for (mu, mon), coeff in sorted(self.terms.items()):
            bits = [str(coeff)]
            if mu:
                bits.append(f"e^{mu}lt" if mu > 1 else "e^lt")
            bits += [coord_name(c) + (f"^{p}" if p > 1 else "") for c, p in mon]
            parts.append("*".join(bits))
        return " + ".join(parts)

    # -- calculus -----------------------------------------------------
    def total_derivative(self, direction: str) -> "DiffExpr":
        """D_t or D_x by the chain rule; jet indices are raised in the
        requested direction, and D_t also differentiates the weight."""
        if direction not in ("t", "x"):
            raise ValueError("direction must be 't' or 'x'")
        raise_t = direction == "t"
        out = {}

        def add(key, coeff):
            if coeff != 0:
                out[key] = out.get(key, Fraction(0)) + coeff

        for (mu, mon), coeff in self.terms.items():
            if raise_t and mu:
                add((mu, mon), coeff * mu * self.lam)
            powers = dict(mon)
            for coord, p in mon:
                raised = (coord[0] + 1, coord[1]) if raise_t else (coord[0], coord[1] + 1)
                new = dict(powers)
                new[coord] -= 1
                if new[coord] == 0:
                    del new[coord]
                new[raised] = new.get(raised, 0) + 1
                add((mu, tuple(sorted(new.items()))), coeff * p)
        return DiffExpr(self.lam, out)

    def evaluate(self, point: "JetPoint") -> float:
        """Float value at one jet point."""
        lam = float(self.lam)
        total = 0.0
        for (mu, mon), coeff in self.terms.items():
            v = float(coeff) * np.exp(mu * lam * point.t)
            for coord, p in mon:
                v *= point.get(coord) ** p
            total += v
        return float(total)

    def evaluate_terms(self, point: "JetPoint") -> list[float]:
        """Per-term values (for relative-residual scales)."""
        lam = float(self.lam)
        vals = []
        for (mu, mon), coeff in self.terms.items():
            v = float(coeff) * np.exp(mu * lam * point.t)
            for coord, p in mon:
                v *= point.get(coord) ** p
            vals.append(v)
        return vals


def total_derivative(e: DiffExpr, direction: str) -> DiffExpr:
    return e.total_derivative(direction)


@dataclass(frozen=True)
class JetPoint:
    """Independent numeric values for the jet coordinates at one point.

    The nine base coordinates cover everything the built-in currents
    need; higher coordinates produced by extra differentiation go in
    extra, keyed by multi-index (nt, nx).
    """

    t: float = 0.0
    x: float = 0.0
    u: float = 0.0
    u_t: float = 0.0
    u_x: float = 0.0
    u_tx: float = 0.0
    u_xx: float = 0.0
    u_txx: float = 0.0
    u_xxx: float = 0.0
    extra: dict = field(default_factory=dict)

    _BASE = {
        (0, 0): "u", (1, 0): "u_t", (0, 1): "u_x", (1, 1): "u_tx",
        (0, 2): "u_xx", (1, 2): "u_txx", (0, 3): "u_xxx",
    }

    def get(self, coord: Coord) -> float:
        name = self._BASE.get(tuple(coord))
        if name is not None:
            return getattr(self, name)
        try:
            return self.extra[tuple(coord)]
        except KeyError:
            raise KeyError(
                f"jet point lacks coordinate {coord_name(coord)}; "
                "extend it via extra={...}") from None

    @classmethod
    def random(cls, rng: np.random.Generator, lo=-2.0, hi=2.0,
               t_range=(0.0, 1.0)) -> "JetPoint":
        vals = rng.uniform(lo, hi, size=7)
        return cls(
            t=float(rng.uniform(*t_range)), x=float(rng.uniform(lo, hi)),
            u=vals[0], u_t=vals[1], u_x=vals[2], u_tx=vals[3],
            u_xx=vals[4], u_txx=vals[5], u_xxx=vals[6],
        )


# ---------------------------------------------------------------------
# Built-in equation forms and currents
# ---------------------------------------------------------------------

def equation_form(lam=0) -> DiffExpr:
    """The local equation as a differential expression:

        F = u_t - u_txx + lam*(u - u_xx) - u u_xxx - 2 u_x u_xx + 3 u^2 u_x
    """
    lam = _as_fraction(lam)
    v = lambda c: DiffExpr.var(c, lam)
    u, u_t, u_x = v((0, 0)), v((1, 0)), v((0, 1))
    u_xx, u_txx, u_xxx = v((0, 2)), v((1, 2)), v((0, 3))
    F = u_t - u_txx - u * u_xxx - 2 * u_x * u_xx + 3 * u**2 * u_x
    if lam != 0:
        F = F + lam * (u - u_xx)
    return F


def weighted_currents(lam) -> list[tuple[DiffExpr, DiffExpr, DiffExpr]]:
    """The two exponentially weighted (C0, C1, characteristic) triples

        (e^{lam t} (u - u_xx),        e^{lam t} (u^3 - u_x^2/2 - u u_xx)),
        (e^{2 lam t} (u^2+u_x^2)/2,   e^{2 lam t} (3u^4/4 - u u_tx
                                          - u^2 u_xx - lam u u_x)),

    with characteristics e^{lam t} and e^{2 lam t} u.  At lam = 0 the
    weights collapse and these reduce term-for-term to the first two
    undissipated currents.
    """
    lam = _as_fraction(lam)
    v = lambda c: DiffExpr.var(c, lam)
    u, u_x, u_tx, u_xx = v((0, 0)), v((0, 1)), v((1, 1)), v((0, 2))
    half = Fraction(1, 2)
    c10 = u - u_xx
    c11 = u**3 - half * u_x**2 - u * u_xx
    c20 = half * (u**2 + u_x**2)
    c21 = Fraction(3, 4) * u**4 - u * u_tx - u**2 * u_xx
    e1 = DiffExpr.exp_weight(1, lam)
    e2 = DiffExpr.exp_weight(2, lam)
    return [
        (e1 * c10, e1 * c11, e1),
        (e2 * c20, e2 * (c21 - lam * u * u_x), e2 * u),
    ]


def builtin_currents(lam=0) -> list[tuple[DiffExpr, DiffExpr, DiffExpr]]:
    """(C0, C1, characteristic) triples verified against equation_form(lam).

    lam = 0: the three second-order currents with characteristics
    phi_1 = 1, phi_2 = u, phi_3 = u^3 - u_x^2/2 - u_tx - u u_xx.
    lam != 0: the two exponentially weighted currents (dissipation kills
    the third); see weighted_currents.
    """
    lam = _as_fraction(lam)
    if lam != 0:
        return weighted_currents(lam)
    v = lambda c: DiffExpr.var(c, lam)
    one = DiffExpr.constant(1, lam)
    u, u_t, u_x = v((0, 0)), v((1, 0)), v((0, 1))
    u_tx, u_xx = v((1, 1)), v((0, 2))
    half = Fraction(1, 2)

    c10 = u - u_xx
    c11 = u**3 - half * u_x**2 - u * u_xx
    c20 = half * (u**2 + u_x**2)
    c21 = Fraction(3, 4) * u**4 - u * u_tx - u**2 * u_xx
    c30 = Fraction(1, 4) * u**4 + half * u * u_x**2
    c31 = (
        half * u**6 + Fraction(1, 8) * u_x**4 - half * u_t**2
        - u * u_t * u_x - half * u**3 * u_x**2 + half * u * u_x**2 * u_xx
        + half * u_x**2 * u_tx + half * u_tx**2 + half * u**2 * u_xx**2
        - u**4 * u_xx + u * u_xx * u_tx - u**3 * u_tx
    )
    phi3 = u**3 - half * u_x**2 - u_tx - u * u_xx
    return [(c10, c11, one), (c20, c21, u), (c30, c31, phi3)]


def symbolic_cancellation(c0: DiffExpr, c1: DiffExpr, phi: DiffExpr,
                          F: DiffExpr) -> DiffExpr:
    """Canonical form of D_t C0 + D_x C1 - phi*F in exact arithmetic.

    The zero expression (empty term list) certifies the current; the
    e^{mu*lam*t} weights cancel per-bucket, so no factoring is needed.
    """
    return c0.total_derivative("t") + c1.total_derivative("x") - phi * F


def divergence_residual(c0: DiffExpr, c1: DiffExpr, phi: DiffExpr,
                        F: DiffExpr, jet: JetPoint) -> float:
    """Float value of D_t C0 + D_x C1 - phi*F at one jet point.

    The divergence and the characteristic side are evaluated as two
    independent floating-point expressions and subtracted, so the result
    reflects genuine numerical cancellation rather than the symbolic
    normal form (which is identically zero for valid currents).
    """
    div = c0.total_derivative("t") + c1.total_derivative("x")
    return div.evaluate(jet) - (phi * F).evaluate(jet)


def divergence_residual_scale(c0: DiffExpr, c1: DiffExpr, phi: DiffExpr,
                              F: DiffExpr, jet: JetPoint) -> float:
    """Sum of |term| magnitudes of the divergence combination at the jet
    point, the natural scale for a relative residual tolerance."""
    expr = c0.total_derivative("t") + c1.total_derivative("x")
    mags = [abs(v) for v in expr.evaluate_terms(jet)]
    mags += [abs(v) for v in (phi * F).evaluate_terms(jet)]
    return max(1.0, float(np.sum(mags)))


def evaluate_at_points(expr: DiffExpr, coords: dict, t: np.ndarray,
                       magnitudes: bool = False) -> np.ndarray:
    """Vectorized evaluation of expr at many jet points.

    coords maps each multi-index (nt, nx) to an array of values; t is the
    matching array of times.  With magnitudes=True returns the sum of
    per-term absolute values instead (a scale for relative residuals).
    """
    t = np.asarray(t, dtype=float)
    lam = float(expr.lam)
    total = np.zeros_like(t)
    for (mu, mon), coeff in expr.terms.items():
        v = float(coeff) * (np.exp(mu * lam * t) if mu else np.ones_like(t))
        for coord, p in mon:
            v = v * coords[coord] ** p
        total += np.abs(v) if magnitudes else v
    return total
