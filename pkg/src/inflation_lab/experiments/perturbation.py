"""Defect-size sweep: PDE solution vs (propagated smooth data + ODE profile).

For each n the full equation is solved from mollified data
(u0 + bump_n, u1), and the defect

    w_n(t) = u_n(t) - S(t)(mollified smooth pair) - v_n(t)

is measured in H^nu (nu = 0, 1, 2) and H^s over the window [0, t_n], together
with its semiclassical energy trace.  The rescaled quantities
sup_t |w_n|_{H^nu} * n^(theta - (nu - s)) should not grow along the sweep.
"""

from __future__ import annotations

import numpy as np

from ..errors import UnresolvableScale
from ..profile import build_profile_data, ode_profile_state, solve_profile
from ..regime import RegimeSpec, default_theta, schedule_for, validate_theta
from ..solver import SolverConfig, evolve, semiclassical_energy
from ..spectral import (MollifierSpec, SpectralField, WaveState,
                        apply_linear_propagator, mollify, sobolev_norm)
from .reports import ExperimentReport, Stopwatch, kendall_tau, run_entries


def _zero_state(grid):
    return WaveState(SpectralField.zero(grid), SpectralField.zero(grid))


def measure_defect(schedule, grid, profile, moll, smooth_data, *,
                   dt, dealias_padding, samples, strict_mollify, center,
                   include_bump=True):
    """Evolve one index and collect the defect norms along the trajectory."""
    s = schedule.s
    if center is None:
        center = (np.pi,) * grid.dim
    if include_bump:
        v0 = build_profile_data(schedule.n, schedule, grid, center)
        v0m = mollify(v0, moll, strict=strict_mollify)
    else:
        v0m = SpectralField.zero(grid)
    if smooth_data is None:
        smooth_data = _zero_state(grid)
    smooth_m = WaveState(mollify(smooth_data.u, moll, strict=strict_mollify),
                         mollify(smooth_data.ut, moll, strict=strict_mollify))
    initial = WaveState(smooth_m.u + v0m, smooth_m.ut)

    steps = max(1, int(round(schedule.t_n / dt)))
    config = SolverConfig(
        dt=dt, sigma=schedule.sigma, dealias_padding=dealias_padding,
        blowup_guard=1e3 * schedule.lambda_n ** (1.0 / schedule.sigma),
        observer_stride=max(1, steps // samples), record_energy=False)

    trace = []

    def observer(state):
        t = state.time
        lin = apply_linear_propagator(smooth_m, t)
        v = ode_profile_state(v0m, t, profile)
        w = WaveState(state.u - lin.u - v.u, state.ut - lin.ut - v.ut, t)
        trace.append({
            "t": t,
            "w_h0": sobolev_norm(w.u, 0.0),
            "w_h1": sobolev_norm(w.u, 1.0),
            "w_h2": sobolev_norm(w.u, 2.0),
            "w_hs": sobolev_norm(w.u, s),
            "semiclassical": semiclassical_energy(w, schedule.n, s),
        })

    evolve(initial, schedule.t_n, config, observers=(observer,))
    return trace


def run_perturbation_check(regime: RegimeSpec, smooth_data, n_list, grid, *,
                           c_moll: float, support_radius: float = 1.0,
                           profile=None, theta: float | None = None,
                           dt: float = 1e-3, dealias_padding: float = 1.5,
                           samples: int = 12, strict_mollify: bool = True,
                           center=None, include_bump: bool = True,
                           jobs: int = 1) -> ExperimentReport:
    """Sweep the rescaled defect norms over n (acceptance criterion 5)."""
    if theta is None:
        theta = regime.theta if regime.theta is not None else default_theta(regime.s, regime.sigma)
    if not validate_theta(regime.s, regime.sigma, theta):
        raise ValueError(f"theta = {theta} outside the admissible window")
    if profile is None:
        profile = solve_profile(regime.sigma)
    report = ExperimentReport(
        name="perturbation",
        config={"s": regime.s, "sigma": regime.sigma, "delta1": regime.delta1,
                "delta2": regime.delta2, "theta": theta, "c_moll": c_moll,
                "support_radius": support_radius, "dim": grid.dim, "grid_n": grid.n,
                "n_list": list(n_list), "dt": dt, "dealias_padding": dealias_padding,
                "samples": samples, "smooth_data": "zero" if smooth_data is None else "given",
                "include_bump": include_bump},
    )
    s = regime.s

    def entry(n):
        schedule = schedule_for(regime, n, c_moll=c_moll, dim=grid.dim)
        moll = MollifierSpec(schedule.eps_n, support_radius)
        try:
            trace = measure_defect(schedule, grid, profile, moll, smooth_data,
                                   dt=dt, dealias_padding=dealias_padding,
                                   samples=samples, strict_mollify=strict_mollify,
                                   center=center, include_bump=include_bump)
        except UnresolvableScale as exc:
            return {"n": float(n), "skipped": True, "reason": str(exc)}, []
        sup = {key: max(row[key] for row in trace)
               for key in ("w_h0", "w_h1", "w_h2", "w_hs", "semiclassical")}
        row = {
            "n": schedule.n, "t_n": schedule.t_n, "lambda_n": schedule.lambda_n,
            "eps": schedule.eps_n,
            "mollifier_resolved": moll.resolvable_on(grid),
            "sup_w_h0": sup["w_h0"], "sup_w_h1": sup["w_h1"],
            "sup_w_h2": sup["w_h2"], "sup_w_hs": sup["w_hs"],
            "sup_semiclassical": sup["semiclassical"],
            "rescaled_h0": sup["w_h0"] * schedule.n ** (theta - (0.0 - s)),
            "rescaled_h1": sup["w_h1"] * schedule.n ** (theta - (1.0 - s)),
            "rescaled_h2": sup["w_h2"] * schedule.n ** (theta - (2.0 - s)),
            "rescaled_hs": sup["w_hs"] * schedule.n ** theta,
            "skipped": False,
        }
        trace_rows = [{"n": schedule.n, **r} for r in trace]
        return row, trace_rows

    with Stopwatch() as sw:
        results = run_entries(list(n_list), entry, jobs)
    report.runtime_seconds = sw.elapsed
    report.table = [row for row, _ in results]
    report.traces["defect_trace"] = [r for _, rows in results for r in rows]

    live = [r for r in report.table if not r.get("skipped")]
    ns = [r["n"] for r in live]
    for key, label in (("rescaled_h0", "h0"), ("rescaled_h1", "h1"),
                       ("rescaled_h2", "h2"), ("rescaled_hs", "hs")):
        vals = [r[key] for r in live]
        tau = kendall_tau(ns, vals) if len(live) >= 2 else 0.0
        report.add_verdict(f"defect-trend-{label}", tau <= 0.0,
                           "acceptance-5: rescaled defect non-increasing (Kendall tau <= 0)",
                           tau=tau, values=vals)
    return report
