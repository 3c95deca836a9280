"""Monte Carlo oracle for job latency and cost under any RedundancyPlan.

Replications are simulated in fixed-size chunks.  Chunk j draws from its own
PCG64 stream seeded by ``SeedSequence(seed, spawn_key=(j,))``, so results do
not depend on how many threads process the chunks.  The per-chunk kernel is
compiled (Cython) when the extension is importable, otherwise numpy; set
``STRAGGLERS_PURE_PYTHON=1`` to force the numpy kernel.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels_py
from .distributions import TaskTimeModel
from .plan import Mode, RedundancyPlan

__all__ = [
    "BACKEND",
    "CHUNK",
    "Outcome",
    "Estimate",
    "MetricEstimate",
    "SimResult",
    "available_backends",
    "extra_columns",
    "run_once",
    "simulate",
    "estimate",
    "empirical_tail_of_latency",
]

CHUNK = 8192

_KERNELS = {"python": _kernels_py.simulate_chunk}
try:
    from ._kernels import simulate_chunk as _compiled_chunk
except ImportError:  # extension not built
    _compiled_chunk = None
else:
    _KERNELS["cython"] = _compiled_chunk

if _compiled_chunk is not None and not os.environ.get("STRAGGLERS_PURE_PYTHON"):
    BACKEND = "cython"
else:
    BACKEND = "python"


def available_backends() -> list[str]:
    return sorted(_KERNELS)


_MODE_CODE = {Mode.NONE: 0, Mode.REPLICATE: 1, Mode.CODE: 2}


def extra_columns(plan: RedundancyPlan) -> int:
    """Lifetimes drawn per run for copies that may start at the delay.

    Layout (canonical plan):
      replicate: task i owns columns [i*w, (i+1)*w), w = c+1 with relaunch
                 (column 0 is the fresh replacement) or c without;
      code:      with relaunch, columns [0, k) are fresh replacements and
                 [k, n) parity tasks; without relaunch all n-k are parity;
      none:      k fresh replacements with relaunch, otherwise nothing.
    """
    p = plan
    if p.mode is Mode.CODE:
        return p.n if p.relaunch else p.n - p.k
    if p.mode is Mode.REPLICATE:
        return p.k * (p.c + 1 if p.relaunch else p.c)
    return p.k if p.relaunch else 0


def _draw(plan: RedundancyPlan, model: TaskTimeModel, rng: np.random.Generator, runs: int):
    x = np.ascontiguousarray(model.sample(rng, (runs, plan.k)), dtype=float)
    y = np.ascontiguousarray(model.sample(rng, (runs, extra_columns(plan))), dtype=float)
    return x, y


@dataclass(frozen=True)
class Outcome:
    latency: float
    cost_cancel: float
    cost_nocancel: float
    relaunched_count: int


def run_once(plan: RedundancyPlan, model: TaskTimeModel, rng: np.random.Generator) -> Outcome:
    """Simulate a single job by walking through its copies one by one."""
    p = plan.canonical()
    x, y = _draw(p, model, rng, 1)
    return _run_events(p, x[0], y[0])


def _run_events(p: RedundancyPlan, x: np.ndarray, y: np.ndarray) -> Outcome:
    k, delta = p.k, p.delay
    # copies: [task, start, finish, killed_at_delay]
    copies = [[i, 0.0, float(x[i]), False] for i in range(k)]
    late = [i for i in range(k) if not x[i] < delta]
    if late:
        if p.relaunch:
            for i in late:
                copies[i][2] = delta
                copies[i][3] = True
        col = 0
        if p.mode is Mode.CODE:
            if p.relaunch:
                for i in late:
                    copies.append([i, delta, delta + float(y[i]), False])
                col = k
            for j in range(p.n - k):
                copies.append([-1, delta, delta + float(y[col + j]), False])
        else:
            w = p.c + 1 if p.relaunch else p.c
            for i in late:
                for j in range(w):
                    copies.append([i, delta, delta + float(y[i * w + j]), False])

    live = [cp for cp in copies if not cp[3]]
    if p.mode is Mode.CODE and late:
        T = sorted(cp[2] for cp in live)[k - 1]
        cutoff = [T] * len(copies)
    else:
        done_at = {}
        for task, _, fin, killed in copies:
            if not killed:
                done_at[task] = min(done_at.get(task, math.inf), fin)
        T = max(done_at.values())
        cutoff = [done_at.get(cp[0], T) for cp in copies]

    cost_cancel = cost_full = residual = 0.0
    for cp, cut in zip(copies, cutoff):
        _, start, fin, killed = cp
        cost_full += fin - start
        if killed:
            cost_cancel += fin - start
        else:
            cost_cancel += min(fin, cut) - start
            residual += max(fin - cut, 0.0)
    assert abs((cost_full - cost_cancel) - residual) <= 1e-9 * max(1.0, cost_full)
    return Outcome(T, cost_cancel, cost_full, len(late) if p.relaunch else 0)


@dataclass(frozen=True)
class Estimate:
    mean: float
    se: float

    def within(self, value: float, n_se: float = 3.0) -> bool:
        return abs(self.mean - value) <= n_se * self.se


@dataclass(frozen=True)
class MetricEstimate:
    E_T: Estimate
    E_C_cancel: Estimate
    E_C_nocancel: Estimate
    E_T2: Estimate
    E_C2: Estimate
    mean_relaunched: float
    runs: int
    seed: int


@dataclass(frozen=True)
class SimResult:
    latency: np.ndarray
    cost_cancel: np.ndarray
    cost_nocancel: np.ndarray
    relaunched: np.ndarray


def _chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def simulate(plan: RedundancyPlan, model: TaskTimeModel, runs: int, seed: int,
             threads: int = 1, backend: Optional[str] = None) -> SimResult:
    """Per-run outcome arrays for ``runs`` independent replications."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    kernel = _KERNELS[backend or BACKEND]
    p = plan.canonical()
    mode = _MODE_CODE[p.mode]
    n = p.n if p.mode is Mode.CODE else p.k
    nchunks = -(-runs // CHUNK)
    lat = np.empty(runs)
    cc = np.empty(runs)
    cn = np.empty(runs)
    nrel = np.empty(runs, dtype=np.int64)

    def work(j: int) -> None:
        lo = j * CHUNK
        hi = min(runs, lo + CHUNK)
        x, y = _draw(p, model, _chunk_rng(seed, j), hi - lo)
        kernel(x, y, mode, p.c, n, float(p.delay), bool(p.relaunch),
               lat[lo:hi], cc[lo:hi], cn[lo:hi], nrel[lo:hi])

    if threads <= 1 or nchunks == 1:
        for j in range(nchunks):
            work(j)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, range(nchunks)))
    return SimResult(lat, cc, cn, nrel)


def _est(v: np.ndarray) -> Estimate:
    return Estimate(float(np.mean(v)), float(np.std(v, ddof=1) / math.sqrt(v.size)))


def estimate(plan: RedundancyPlan, model: TaskTimeModel, runs: int, seed: int,
             threads: int = 1, backend: Optional[str] = None) -> MetricEstimate:
    """Means and standard errors of latency, both costs, and their squares."""
    if runs < 2:
        raise ValueError("runs must be >= 2 for a standard error")
    r = simulate(plan, model, runs, seed, threads=threads, backend=backend)
    return MetricEstimate(
        E_T=_est(r.latency),
        E_C_cancel=_est(r.cost_cancel),
        E_C_nocancel=_est(r.cost_nocancel),
        E_T2=_est(r.latency ** 2),
        E_C2=_est(r.cost_cancel ** 2),
        mean_relaunched=float(np.mean(r.relaunched)),
        runs=runs,
        seed=seed,
    )


def empirical_tail_of_latency(plan: RedundancyPlan, model: TaskTimeModel, runs: int, seed: int,
                              t_grid: Sequence[float], threads: int = 1) -> np.ndarray:
    """Fraction of simulated jobs with latency > t, for each t in ``t_grid``."""
    t = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t) < 0):
        raise ValueError("t_grid must be ascending")
    lat = np.sort(simulate(plan, model, runs, seed, threads=threads).latency)
    return 1.0 - np.searchsorted(lat, t, side="right") / lat.size
