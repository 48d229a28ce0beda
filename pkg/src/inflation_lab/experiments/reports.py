"""Structured records of experiment runs: tables, verdicts, fitted quantities."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Verdict:
    name: str
    passed: bool
    criterion: str           # which named acceptance criterion this serves
    details: dict = field(default_factory=dict)


@dataclass
class ExperimentReport:
    """Inputs snapshot, per-sample table, verdict flags, and fits for one run."""

    name: str
    config: dict
    table: list = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)
    fits: dict = field(default_factory=dict)
    traces: dict = field(default_factory=dict)
    runtime_seconds: float = 0.0

    def add_verdict(self, name, passed, criterion, **details):
        self.verdicts[name] = Verdict(name=name, passed=bool(passed),
                                      criterion=criterion, details=details)

    @property
    def passed(self):
        return all(v.passed for v in self.verdicts.values())

    def summary_dict(self):
        return {
            "experiment": self.name,
            "config": self.config,
            "passed": self.passed,
            "verdicts": {
                k: {"passed": v.passed, "criterion": v.criterion, "details": v.details}
                for k, v in sorted(self.verdicts.items())
            },
            "fits": self.fits,
            "runtime_seconds": self.runtime_seconds,
            "rows": len(self.table),
        }


class Stopwatch:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def kendall_tau(xs, ys):
    """Plain Kendall rank correlation; ties contribute zero."""
    pairs = 0
    score = 0
    n = len(xs)
    for i in range(n):
        for j in range(i + 1, n):
            dx = (xs[j] > xs[i]) - (xs[j] < xs[i])
            dy = (ys[j] > ys[i]) - (ys[j] < ys[i])
            pairs += 1
            score += dx * dy
    return score / pairs if pairs else 0.0


def loglog_slope(xs, ys):
    """Least-squares slope of log y against log x."""
    import numpy as np

    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    lx = lx - lx.mean()
    return float(np.dot(lx, ly - ly.mean()) / np.dot(lx, lx))


def variation_factor(values):
    """max/min over positive values; inf when the list degenerates."""
    vals = [v for v in values if v is not None]
    if not vals or min(vals) <= 0:
        return float("inf")
    return max(vals) / min(vals)


def run_entries(entries, worker, jobs=1):
    """Run independent sweep entries, optionally in a thread pool.

    Results come back in input order so reports are identical for any job count.
    """
    if jobs <= 1:
        return [worker(e) for e in entries]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, entries))
