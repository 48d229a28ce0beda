"""Pseudo-spectral wave-equation lab: solver, profiles, schedules, experiments."""

from .errors import (BlowupDetected, GridMismatch, InflationLabError, InvalidDeltas,
                     InvalidIndex, InvalidRegime, NonConvergence, NonFinite,
                     OverlapDetected, ParseError, PreconditionViolated,
                     UnresolvableScale, UnresolvedOscillation, ValidationError)
from .spectral import (MollifierSpec, SpectralField, TorusGrid, WaveState,
                       apply_linear_propagator, ball_cutoff, change_resolution,
                       change_state_resolution, mollify, mollify_state, pair_norm,
                       random_band_limited, restrict_ball_norm, sobolev_norm,
                       standard_bump, to_physical, to_spectral)
from .profile import (BumpSpec, DEFAULT_BUMP, ProfileSolution, build_profile_data,
                      evaluate_ode_profile, evaluate_ode_profile_velocity,
                      ode_profile_state, period_from_zero_crossings, profile_period,
                      solve_profile)
from .regime import (ParameterSchedule, RegimeCheck, RegimeSpec, default_theta,
                     make_schedule, schedule_for, theta_window,
                     validate_inflation_deltas, validate_regime, validate_theta)
from .solver import (EnergyReading, SolverConfig, evolve, hamiltonian,
                     nonlinear_pointwise_step, reversed_state, semiclassical_energy)

__version__ = "0.1.0"
