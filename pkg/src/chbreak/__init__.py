"""chbreak: pseudospectral simulation and verification toolkit for a
weakly dissipative Camassa-Holm-type equation with cubic nonlinearity.

Subpackages by capability:

* spectral    periodic grid, Fourier calculus, Helmholtz operator, norms
* equation    the nonlocal evolution law and its residual certificates
* timestepper CFL-adaptive RK4 integration with breaking detection
* invariants  conserved quantities and drift audits
* breaking    breaking threshold, time bound, slope audits
* elliptic    elliptic integrals, Jacobi functions, traveling waves
* jetspace    exact off-shell verification of conserved currents
* cli         batch front end (simulate/forecast/travelwave/...)
"""

from .spectral import (
    GridField,
    NonFiniteFieldError,
    PeriodicGrid,
    dealias_filter,
    helmholtz_apply,
    helmholtz_inverse,
    quadrature,
    sobolev_norm,
    spectral_derivative,
)
from .equation import (
    EquationParams,
    nonlinearity_h,
    residual_local_form,
    residual_m_form,
    rhs,
)
from .timestepper import StepControl, Trajectory, integrate, step_rk4
from .invariants import InvariantReport, audit, h0, h1, h_energy, weighted_invariants
from .breaking import (
    BreakingForecast,
    DegenerateDataError,
    HypothesisError,
    RiccatiAudit,
    epsilon0,
    fit_growth_envelope,
    forecast,
    pointwise_bound_excess,
    psi,
    riccati_audit,
    t_plus,
    track_min_slope,
)
from .elliptic import (
    DegenerateWaveError,
    NoWaveError,
    WaveParams,
    complete_E,
    complete_K,
    first_integral_series,
    fit_traveling_wave,
    jacobi_sn_cn_dn,
    snoidal_profile,
    to_dnoidal,
    wave_profile,
)
from .jetspace import (
    DiffExpr,
    JetPoint,
    builtin_currents,
    divergence_residual,
    divergence_residual_scale,
    equation_form,
    evaluate_at_points,
    symbolic_cancellation,
    total_derivative,
    weighted_currents,
)

__version__ = "0.1.0"
