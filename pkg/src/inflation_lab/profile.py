"""The periodic oscillator profile V and the concentrated initial data built from it.

V solves V'' + |V|^(2 sigma) V = 0 with V(0) = 1, V'(0) = 0.  It is periodic;
the pointwise energy V'^2/2 + |V|^(2 sigma + 2)/(2 sigma + 2) is conserved and
equals 1/(2 sigma + 2).  Any other amplitude follows by rescaling:
the solution with initial amplitude a is a V(|a|^sigma t).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.interpolate import CubicSpline

from .errors import NonConvergence, UnresolvableScale
from .spectral import SpectralField, TorusGrid, WaveState

SAMPLES_PER_PERIOD = 8192


def profile_period(sigma: float) -> float:
    """Oscillation period T(sigma) = 4 sqrt(sigma+1) * int_0^1 (1 - v^(2s+2))^(-1/2) dv.

    The substitution v = 1 - w^2 removes the endpoint singularity, so plain
    adaptive quadrature converges to ~1e-13.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    m = 2.0 * sigma + 2.0

    def integrand(w):
        v = 1.0 - w * w
        return 2.0 * w / np.sqrt(1.0 - v ** m)

    value, err = quad(integrand, 0.0, 1.0, epsabs=1e-14, epsrel=1e-13, limit=200)
    if err > 1e-9:
        raise NonConvergence(f"period quadrature error {err:.2e} too large")
    return 4.0 * np.sqrt(sigma + 1.0) * value


@dataclass
class ProfileSolution:
    """Tabulated V over one period with periodic cubic-spline evaluation."""

    sigma: float
    period: float
    t_samples: np.ndarray
    v_samples: np.ndarray
    vp_samples: np.ndarray
    energy_drift: float
    _v_spline: CubicSpline = dataclass_field(repr=False, default=None)
    _vp_spline: CubicSpline = dataclass_field(repr=False, default=None)

    def __post_init__(self):
        if self._v_spline is None:
            self._v_spline = CubicSpline(self.t_samples, self.v_samples, bc_type="periodic")
            self._vp_spline = CubicSpline(self.t_samples, self.vp_samples, bc_type="periodic")

    def value(self, t):
        """V(t), for scalar or array t (phase wrapped into one period)."""
        return self._v_spline(np.mod(t, self.period))

    def derivative(self, t):
        """V'(t)."""
        return self._vp_spline(np.mod(t, self.period))

    def energy(self, t):
        v, vp = self.value(t), self.derivative(t)
        return 0.5 * vp ** 2 + np.abs(v) ** (2 * self.sigma + 2) / (2 * self.sigma + 2)


def solve_profile(sigma: float, tolerance: float = 1e-10) -> ProfileSolution:
    """Integrate the profile ODE and tabulate one period.

    The returned table keeps the ODE energy within `tolerance` of its exact
    value 1/(2 sigma + 2); the integration is validated over ten periods.
    """
    if not 0.5 <= sigma <= 2.0:
        raise ValueError(f"sigma must lie in [1/2, 2], got {sigma}")
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    period = profile_period(sigma)

    def rhs(t, y):
        v, vp = y
        return (vp, -np.abs(v) ** (2.0 * sigma) * v)

    t_table = np.linspace(0.0, period, SAMPLES_PER_PERIOD + 1)
    sol = solve_ivp(rhs, (0.0, 10.0 * period), (1.0, 0.0), method="DOP853",
                    rtol=1e-12, atol=1e-13, dense_output=True)
    if not sol.success:
        raise NonConvergence(f"profile integration failed: {sol.message}")
    # energy drift over ten periods, probed densely
    t_probe = np.linspace(0.0, 10.0 * period, 4096)
    v_probe, vp_probe = sol.sol(t_probe)
    e_exact = 1.0 / (2.0 * sigma + 2.0)
    energy = 0.5 * vp_probe ** 2 + np.abs(v_probe) ** (2 * sigma + 2) / (2 * sigma + 2)
    drift = float(np.max(np.abs(energy - e_exact)))
    if drift > tolerance:
        raise NonConvergence(f"energy drift {drift:.2e} exceeds tolerance {tolerance:.2e}")
    v_tab, vp_tab = sol.sol(t_table)
    # enforce exact periodicity of the table endpoints for the periodic spline
    v_tab[-1] = v_tab[0]
    vp_tab[-1] = vp_tab[0]
    return ProfileSolution(sigma=sigma, period=period, t_samples=t_table,
                           v_samples=v_tab, vp_samples=vp_tab, energy_drift=drift)


def period_from_zero_crossings(sigma: float) -> float:
    """Period located by a V' sign change on the trajectory (independent check).

    V' falls through zero exactly when V returns to its maximum, i.e. at t = T
    (the crossing at T/2 is a rising one and is skipped by the direction filter).
    """
    def rhs(t, y):
        v, vp = y
        return (vp, -np.abs(v) ** (2.0 * sigma) * v)

    def crossing(t, y):
        return y[1]

    crossing.direction = -1.0
    # start a hair past t=0 (Taylor step) so the t=0 zero of V' cannot trigger
    t0 = 1e-6
    y0 = (1.0 - 0.5 * t0 ** 2, -t0)
    t_max = 16.0 * np.sqrt(sigma + 1.0)
    sol = solve_ivp(rhs, (t0, t_max), y0, method="DOP853",
                    rtol=1e-12, atol=1e-13, events=crossing)
    if len(sol.t_events[0]) == 0:
        raise NonConvergence("no period-closing zero crossing found")
    return float(sol.t_events[0][0])


@dataclass(frozen=True)
class BumpSpec:
    """The smooth radial bump used for the concentrated data.

    phi(x) = exp(1 - 1/(1 - |x|^2)) for |x| < 1, zero outside: radial,
    0 <= phi <= 1, phi(0) = 1, and the gradient is nonzero on 0 < |x| < 1.
    """

    formula: str = "exp(1 - 1/(1 - |x|^2)) for |x| < 1, else 0"
    support_radius: float = 1.0

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        inside = np.abs(r) < self.support_radius
        rr = r[inside] / self.support_radius
        with np.errstate(divide="ignore", over="ignore"):
            out[inside] = np.exp(1.0 - 1.0 / (1.0 - rr ** 2))
        return out

    def gradient_magnitude(self, r):
        """|d phi / d r|, analytic."""
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        inside = (np.abs(r) < self.support_radius) & (r != 0)
        rr = r[inside] / self.support_radius
        val = np.exp(1.0 - 1.0 / (1.0 - rr ** 2))
        out[inside] = val * 2.0 * np.abs(rr) / (1.0 - rr ** 2) ** 2 / self.support_radius
        return out


DEFAULT_BUMP = BumpSpec()


def build_profile_data(n: float, schedule, grid: TorusGrid, center,
                       bump: BumpSpec = DEFAULT_BUMP) -> SpectralField:
    """Concentrated bump kappa_n n^(d/2-s) phi(n (x - center)) on the grid.

    The grid must resolve the 1/n support: at least 8 grid cells inside it.
    """
    if n < 2:
        raise ValueError(f"concentration index must be >= 2, got {n}")
    if abs(float(n) - float(schedule.n)) > 1e-12:
        raise ValueError(f"index {n} does not match schedule.n = {schedule.n}")
    radius = bump.support_radius / n
    if grid.cells_in_ball(radius) < 8.0:
        raise UnresolvableScale(
            f"bump of radius {radius:.4g} covers {grid.cells_in_ball(radius):.2f} "
            f"cells on {grid}; need >= 8")
    d = grid.dim
    amplitude = schedule.kappa_n * float(n) ** (d / 2.0 - schedule.s)
    r = grid.periodic_distance(center)
    return SpectralField.from_physical(grid, amplitude * bump(n * r))


def evaluate_ode_profile(v0: SpectralField, t: float, profile: ProfileSolution) -> SpectralField:
    """Pointwise a V(t |a|^sigma) with a = v0(x): the zero-dispersion evolution.

    At t = 0 this returns v0 itself (V(0) = 1); each point follows its own
    rescaled copy of the profile oscillation.
    """
    a = v0.physical
    phase = t * np.abs(a) ** profile.sigma
    return SpectralField.from_physical(v0.grid, a * profile.value(phase))


def evaluate_ode_profile_velocity(v0: SpectralField, t: float,
                                  profile: ProfileSolution) -> SpectralField:
    """Time derivative of the pointwise profile evolution: a |a|^sigma V'(t |a|^sigma)."""
    a = v0.physical
    amp = np.abs(a) ** profile.sigma
    return SpectralField.from_physical(v0.grid, a * amp * profile.derivative(t * amp))


def ode_profile_state(v0: SpectralField, t: float, profile: ProfileSolution) -> WaveState:
    return WaveState(
        u=evaluate_ode_profile(v0, t, profile),
        ut=evaluate_ode_profile_velocity(v0, t, profile),
        time=t,
    )
