"""Finite-propagation-speed fidelity check.

Two data sets that agree on a ball B(x0, r0) are evolved side by side; the
wave equation keeps them equal on the shrinking ball B(x0, r0 - t).  A
spectral discretization is not exactly finite-speed, so the measured interior
discrepancy quantifies leakage; it must be small and must shrink rapidly as
the resolution grows (the data are resampled per level, the physics is fixed).
"""

from __future__ import annotations

import numpy as np

from ..errors import PreconditionViolated
from ..solver import SolverConfig, evolve
from ..spectral import TorusGrid, WaveState, change_state_resolution
from .reports import ExperimentReport, Stopwatch


def _interior_discrepancy(grid, mask_radius, center, ua, ub):
    r = grid.periodic_distance(center)
    mask = r <= mask_radius
    if not np.any(mask):
        return 0.0
    return float(np.max(np.abs(ua[mask] - ub[mask])))


def _assert_agreement(grid, center, r0, state_a, state_b):
    r = grid.periodic_distance(center)
    mask = r <= r0
    for name, fa, fb in (("u", state_a.u, state_b.u), ("ut", state_a.ut, state_b.ut)):
        da = fa.physical[mask]
        db = fb.physical[mask]
        scale = max(np.max(np.abs(da), initial=0.0), np.max(np.abs(db), initial=0.0), 1.0)
        gap = float(np.max(np.abs(da - db), initial=0.0))
        if gap > 1e-13 * scale:
            raise PreconditionViolated(
                f"data disagree on B(x0, r0) in component {name}: max gap {gap:.3e}")


def run_fsp_check(data_a: WaveState, data_b: WaveState, ball, T: float, *,
                  sigma: float, levels: int = 2, data_builder=None,
                  dt: float = 2e-3, dealias_padding: float = 1.5,
                  samples: int = 6, interior_shrink: float = 0.9,
                  tolerance: float = 1e-6, decay_factor: float = 4.0) -> ExperimentReport:
    """Evolve both data sets across a resolution sweep (acceptance criterion 6).

    `data_builder(grid) -> (WaveState, WaveState)` regenerates the analytic
    data per level; without it the given states are spectrally upsampled
    (the represented function is then identical across levels).  For T >= r0
    the lemma makes no claim: the table is reported without verdicts.
    """
    center, r0 = ball
    base_grid = data_a.grid
    if data_b.grid != base_grid:
        raise PreconditionViolated("data_a and data_b must share a grid")
    guaranteed = T < r0
    report = ExperimentReport(
        name="fsp",
        config={"dim": base_grid.dim, "base_n": base_grid.n, "levels": levels,
                "r0": float(r0), "T": float(T), "sigma": sigma, "dt": dt,
                "samples": samples, "interior_shrink": interior_shrink,
                "tolerance": tolerance, "guaranteed_window": guaranteed},
    )
    level_rows = []
    with Stopwatch() as sw:
        for level in range(levels):
            n_level = base_grid.n * 2 ** level
            grid = TorusGrid(base_grid.dim, n_level)
            if data_builder is not None:
                a, b = data_builder(grid)
            elif level == 0:
                a, b = data_a, data_b
            else:
                a = change_state_resolution(data_a, n_level)
                b = change_state_resolution(data_b, n_level)
            _assert_agreement(grid, center, r0, a, b)

            steps = max(1, int(round(T / dt)))
            config = SolverConfig(dt=dt, sigma=sigma, dealias_padding=dealias_padding,
                                  observer_stride=max(1, steps // samples),
                                  record_energy=False)
            snapshots_a = []
            evolve(a, T, config,
                   observers=(lambda st: snapshots_a.append(st.u.physical),))
            disc_rows = []

            def compare(state_b):
                t_rel = state_b.time - b.time
                ua_phys = snapshots_a[len(disc_rows)]
                radius = interior_shrink * (r0 - t_rel)
                if radius <= 0:
                    disc = float("nan")
                else:
                    disc = _interior_discrepancy(grid, radius, center,
                                                 ua_phys, state_b.u.physical)
                disc_rows.append({"n": n_level, "t": t_rel, "mask_radius": radius,
                                  "discrepancy": disc})

            evolve(b, T, config, observers=(compare,))
            finite = [r["discrepancy"] for r in disc_rows if np.isfinite(r["discrepancy"])]
            level_rows.append({"n": n_level, "max_discrepancy": max(finite) if finite else 0.0})
            report.traces.setdefault("per_sample", []).extend(disc_rows)
    report.runtime_seconds = sw.elapsed
    for i, row in enumerate(level_rows):
        row["decay_from_previous"] = (
            level_rows[i - 1]["max_discrepancy"] / row["max_discrepancy"]
            if i > 0 and row["max_discrepancy"] > 0 else float("inf") if i > 0 else None)
    report.table = level_rows
    if guaranteed:
        finest = level_rows[-1]["max_discrepancy"]
        report.add_verdict("fsp-interior-small", finest <= tolerance,
                           "acceptance-6: interior discrepancy below tolerance",
                           finest=finest, tolerance=tolerance)
        if len(level_rows) > 1:
            ratios = [r["decay_from_previous"] for r in level_rows[1:]]
            report.add_verdict("fsp-leakage-decay",
                               all(r >= decay_factor for r in ratios),
                               "acceptance-6: discrepancy shrinks >= 4x per doubling",
                               ratios=ratios)
    return report
