"""Closed-form latency and cost of k-task jobs under redundancy and relaunch.

Conventions
-----------
* ``lam``/``alpha`` are the Pareto scale and tail index of one task.
* For shifted-exponential tasks the functions take the *job-level* shift D;
  each task is SExp(D/k, mu).  ``evaluate`` converts from a per-task model.
* Every evaluator returns both costs: ``E_C_cancel`` kills redundant work as
  soon as it is useless (sibling replicas when their task finishes, leftover
  coded tasks when the job finishes), ``E_C_nocancel`` lets everything run.
* Relaunch formulas are exact: they condition on R ~ Binomial(k, q), the
  number of tasks that finish before the relaunch delay.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .distributions import Empirical, Pareto, ShiftedExp, TaskTimeModel
from .plan import Metrics, Mode, RedundancyPlan
from .specialfn import (
    beta_ext,
    gamma,
    gamma_ratio,
    gen_harmonic2,
    harmonic,
    log_gamma,
    reg_inc_beta,
)

__all__ = [
    "UnsupportedCombination",
    "MomentExistenceError",
    "SearchCapError",
    "ConvergenceError",
    "g_norelaunch",
    "coded_latency_pareto",
    "zd_replicated_sexp",
    "zd_coded_sexp",
    "zd_replicated_pareto",
    "zd_coded_pareto",
    "joint_osm_exp",
    "joint_osm_pareto",
    "second_moments_sexp",
    "second_moments_pareto",
    "baseline_min_latency_replicated",
    "baseline_min_latency_coded",
    "relaunch_tail",
    "relaunch_metrics",
    "RelaunchDerived",
    "opt_relaunch",
    "golden_section_min",
    "relaunch_replicated_metrics",
    "relaunch_coded_metrics",
    "mean_field_replicated_latency",
    "mean_field_coded_latency",
    "evaluate",
]

C_CAP = 100
N_CAP_FACTOR = 50


class UnsupportedCombination(ValueError):
    """No closed form covers the requested plan/distribution pair."""


class MomentExistenceError(ValueError):
    def __init__(self, i: int, j: int, n: int, alpha: float):
        super().__init__(
            f"E[X_{{{n}:{i}}} X_{{{n}:{j}}}] is infinite for alpha={alpha}: "
            f"need alpha > max(2/{n - i + 1}, 1/{n - j + 1})"
        )
        self.i, self.j, self.n, self.alpha = i, j, n, alpha


class SearchCapError(RuntimeError):
    pass


class ConvergenceError(RuntimeError):
    pass


def _need_alpha_gt1(alpha: float) -> None:
    if not alpha > 1:
        raise ValueError(f"expected values need alpha > 1, got {alpha!r}")


def _need_positive(**kw) -> None:
    for name, v in kw.items():
        if not (v > 0 and math.isfinite(v)):
            raise ValueError(f"{name} must be positive and finite, got {v!r}")


def _need_int(name: str, v, lo: int) -> int:
    if int(v) != v or v < lo:
        raise ValueError(f"{name} must be an integer >= {lo}, got {v!r}")
    return int(v)


# -- zero-delay redundancy -------------------------------------------------

def g_norelaunch(k: int, lam: float, alpha: float) -> float:
    """E[max of k iid Pareto(lam, alpha)] = lam k! G(1-1/a) / G(k+1-1/a)."""
    k = _need_int("k", k, 1)
    _need_positive(lam=lam)
    _need_alpha_gt1(alpha)
    if math.isinf(alpha):
        return lam
    b = 1.0 / alpha
    return lam * gamma_ratio([k + 1.0, 1.0 - b], [k + 1.0 - b])


def coded_latency_pareto(k: int, n: int, lam: float, alpha: float) -> float:
    """E[X_{n:k}] for Pareto tasks: the k-th of n completions."""
    b = 1.0 / alpha
    return lam * gamma_ratio([n + 1.0, n - k + 1.0 - b], [n - k + 1.0, n + 1.0 - b])


def zd_replicated_sexp(k: int, c: int, D: float, mu: float) -> Metrics:
    """k tasks, each with c extra clones from time 0; tasks are SExp(D/k, mu)."""
    k = _need_int("k", k, 1)
    c = _need_int("c", c, 0)
    _need_positive(D=D, mu=mu)
    r = c + 1
    return Metrics(
        E_T=D / k + harmonic(k) / (r * mu),
        E_C_cancel=r * D + k / mu,
        E_C_nocancel=r * (D + k / mu),
    )


def zd_coded_sexp(k: int, n: int, D: float, mu: float) -> Metrics:
    k = _need_int("k", k, 1)
    n = _need_int("n", n, k)
    _need_positive(D=D, mu=mu)
    return Metrics(
        E_T=D / k + (harmonic(n) - harmonic(n - k)) / mu,
        E_C_cancel=n * D / k + k / mu,
        E_C_nocancel=n * (D / k + 1.0 / mu),
    )


def zd_replicated_pareto(k: int, c: int, lam: float, alpha: float) -> Metrics:
    """Each task is the minimum of c+1 clones, i.e. Pareto(lam, (c+1) alpha)."""
    k = _need_int("k", k, 1)
    c = _need_int("c", c, 0)
    _need_positive(lam=lam, alpha=alpha)
    at = (c + 1) * alpha
    if not at > 1:
        raise ValueError(f"(c+1)*alpha must exceed 1, got {at!r}")
    nocancel = k * (c + 1) * lam * alpha / (alpha - 1.0) if alpha > 1 else math.inf
    return Metrics(
        E_T=g_norelaunch(k, lam, at),
        E_C_cancel=lam * k * (c + 1) * at / (at - 1.0),
        E_C_nocancel=nocancel,
    )


def zd_coded_pareto(k: int, n: int, lam: float, alpha: float) -> Metrics:
    k = _need_int("k", k, 1)
    n = _need_int("n", n, k)
    _need_positive(lam=lam)
    _need_alpha_gt1(alpha)
    full = n * lam * alpha / (alpha - 1.0)
    if n == k:
        # Gamma(n-k) pole: the leftover-task term vanishes
        cancel = full
    else:
        b = 1.0 / alpha
        extra = gamma_ratio([float(n), n - k + 1.0 - b], [float(n - k), n + 1.0 - b])
        cancel = lam * n / (alpha - 1.0) * (alpha - extra)
    return Metrics(E_T=coded_latency_pareto(k, n, lam, alpha), E_C_cancel=cancel, E_C_nocancel=full)


# -- order-statistic products and second moments --------------------------

def _check_order(n: int, i: int, j: int) -> None:
    if not (1 <= i <= j <= n):
        raise ValueError(f"need 1 <= i <= j <= n, got n={n}, i={i}, j={j}")


def joint_osm_exp(n: int, i: int, j: int, mu: float) -> float:
    """E[X_{n:i} X_{n:j}] for Exp(mu), i <= j."""
    _check_order(n, i, j)
    _need_positive(mu=mu)
    h = harmonic
    return (
        gen_harmonic2(n) - gen_harmonic2(n - i) + (h(n) - h(n - i)) * (h(n) - h(n - j))
    ) / (mu * mu)


def joint_osm_pareto(n: int, i: int, j: int, lam: float, alpha: float) -> float:
    """E[X_{n:i} X_{n:j}] for Pareto(lam, alpha), i <= j."""
    _check_order(n, i, j)
    _need_positive(lam=lam, alpha=alpha)
    if not (alpha > 2.0 / (n - i + 1) and alpha > 1.0 / (n - j + 1)):
        raise MomentExistenceError(i, j, n, alpha)
    b = 1.0 / alpha
    return lam * lam * math.exp(
        log_gamma(n + 1.0) - log_gamma(n + 1.0 - 2 * b)
        + log_gamma(n - i + 1.0 - 2 * b) - log_gamma(n - i + 1.0 - b)
        + log_gamma(n - j + 1.0 - b) - log_gamma(n - j + 1.0)
    )


def _pair_sum(moment: Callable[[int, int], float], k: int) -> float:
    # sum over all (i, j) in [1, k]^2 of a symmetric product moment
    diag = math.fsum(moment(i, i) for i in range(1, k + 1))
    off = math.fsum(moment(i, j) for i in range(1, k + 1) for j in range(i + 1, k + 1))
    return diag + 2.0 * off


def _exp_osm_table(n: int, mu: float) -> Callable[[int, int], float]:
    H = np.concatenate([[0.0], np.cumsum(1.0 / np.arange(1, n + 1))])
    H2 = np.concatenate([[0.0], np.cumsum(1.0 / np.arange(1, n + 1) ** 2)])

    def m(i: int, j: int) -> float:
        return (H2[n] - H2[n - i] + (H[n] - H[n - i]) * (H[n] - H[n - j])) / (mu * mu)

    return m


def _checked(m: Metrics) -> Metrics:
    # sd_* raise InconsistentMomentError on a negative variance
    m.sd_T
    m.sd_C
    return m


def _level(c: Optional[int], n: Optional[int]) -> tuple[str, int]:
    if (c is None) == (n is None):
        raise ValueError("give exactly one of c (replication) or n (coding)")
    return ("replicate", int(c)) if c is not None else ("code", int(n))


def second_moments_sexp(k: int, D: float, mu: float, *, c: Optional[int] = None,
                        n: Optional[int] = None) -> Metrics:
    """First and second moments of latency and cancellation cost, SExp(D/k, mu) tasks."""
    kind, level = _level(c, n)
    k = _need_int("k", k, 1)
    if kind == "replicate":
        c = _need_int("c", level, 0)
        first = zd_replicated_sexp(k, c, D, mu)
        r = c + 1
        ET2 = first.E_T ** 2 + gen_harmonic2(k) / (r * r * mu * mu)
        ys = _pair_sum(_exp_osm_table(k, r * mu), k)
        EC2 = (r * D) ** 2 + 2.0 * D * r * k / mu + r * r * ys
    else:
        n = _need_int("n", level, k)
        first = zd_coded_sexp(k, n, D, mu)
        m = _exp_osm_table(n, mu)
        ET2 = (gen_harmonic2(n) - gen_harmonic2(n - k)) / (mu * mu) + first.E_T ** 2
        EC2 = (
            (n * D / k) ** 2 + 2.0 * n * D / mu
            + (n - k) ** 2 * m(k, k)
            + 2.0 * (n - k) * math.fsum(m(i, k) for i in range(1, k + 1))
            + _pair_sum(m, k)
        )
    return _checked(Metrics(first.E_T, first.E_C_cancel, first.E_C_nocancel, E_T2=ET2, E_C2=EC2))


def second_moments_pareto(k: int, lam: float, alpha: float, *, c: Optional[int] = None,
                          n: Optional[int] = None) -> Metrics:
    kind, level = _level(c, n)
    k = _need_int("k", k, 1)
    if kind == "replicate":
        c = _need_int("c", level, 0)
        first = zd_replicated_pareto(k, c, lam, alpha)
        at = (c + 1) * alpha

        def m(i, j):
            return joint_osm_pareto(k, i, j, lam, at)

        ET2 = m(k, k)
        EC2 = (c + 1) ** 2 * _pair_sum(m, k)
    else:
        n = _need_int("n", level, k)
        first = zd_coded_pareto(k, n, lam, alpha)

        def m(i, j):
            return joint_osm_pareto(n, i, j, lam, alpha)

        ET2 = m(k, k)
        EC2 = (
            (n - k) ** 2 * ET2
            + 2.0 * (n - k) * math.fsum(m(i, k) for i in range(1, k + 1))
            + _pair_sum(m, k)
        )
    return _checked(Metrics(first.E_T, first.E_C_cancel, first.E_C_nocancel, E_T2=ET2, E_C2=EC2))


# -- latency reduction at no extra cost ------------------------------------

def baseline_min_latency_replicated(k: int, lam: float, alpha: float) -> tuple[int, float]:
    """Largest clone count whose cancellation cost stays within the c=0 cost.

    Cost(c) <= Cost(0) reduces to c + 1 <= 1/(alpha - 1); the tiny slack
    keeps exact ties (e.g. alpha = 1.1, 1.2) on the inclusive side.
    """
    _need_alpha_gt1(alpha)
    c_max = max(math.floor(1.0 / (alpha - 1.0) * (1 + 1e-12)) - 1, 0)
    return c_max, zd_replicated_pareto(k, c_max, lam, alpha).E_T


class CodedBaseline(NamedTuple):
    n_max: int
    E_T_min: float
    upper_bound: float
    printed_lhs: Optional[float]


def baseline_min_latency_coded(k: int, lam: float, alpha: float,
                               n_cap: Optional[int] = None) -> CodedBaseline:
    """Largest n whose coded cancellation cost stays within the n=k cost.

    Exhaustive over n in [k, n_cap] (default 50k).  ``printed_lhs`` evaluates
    E[T(n)] - E[T(k)]/(n - k) - lam*alpha at the found n for comparison with
    the fixed-point reading of the same condition; None when n_max == k.
    """
    k = _need_int("k", k, 1)
    _need_alpha_gt1(alpha)
    n_cap = N_CAP_FACTOR * k if n_cap is None else n_cap
    base = zd_coded_pareto(k, k, lam, alpha).E_C_cancel
    n_max = k
    for n in range(k + 1, n_cap + 1):
        if zd_coded_pareto(k, n, lam, alpha).E_C_cancel <= base:
            n_max = n
    if n_max == n_cap and n_cap > k:
        raise SearchCapError(f"cost condition still holds at the search cap n={n_cap}")
    g = g_norelaunch(k, lam, alpha)
    ET = coded_latency_pareto(k, n_max, lam, alpha)
    lhs = None if n_max == k else ET - g / (n_max - k) - lam * alpha
    return CodedBaseline(n_max, ET, lam * alpha + g, lhs)


# -- relaunch without redundancy -------------------------------------------

def _q_p(lam: float, alpha: float, delta: float) -> tuple[float, float]:
    """(q, 1-q): probability a task finishes before ``delta`` and its complement."""
    if delta <= lam:
        return 0.0, 1.0
    p = (lam / delta) ** alpha
    return 1.0 - p, p


def _q_pow_k(p: float, k: int) -> float:
    return math.exp(k * math.log1p(-p)) if p < 1 else 0.0


def _task_survival(t, lam, alpha, delta):
    # survival of one relaunched task: original before delta, fresh copy after
    t = np.asarray(t, dtype=float)
    _, p = _q_p(lam, alpha, delta)
    with np.errstate(divide="ignore"):
        before = np.where(t <= lam, 1.0, (lam / np.maximum(t, lam)) ** alpha)
        s = t - delta
        after = p * np.where(s <= lam, 1.0, (lam / np.maximum(s, lam)) ** alpha)
    return np.where(t < delta, before, after)


def relaunch_tail(k: int, lam: float, alpha: float, delta: float, t):
    """Pr{T > t} with tasks still running at ``delta`` relaunched fresh.

    T is the max of k iid completion times, each X if X < delta else
    delta + X'.  Written as 1 - (1 - s)^k with s the per-task survival.
    """
    k = _need_int("k", k, 1)
    _need_positive(lam=lam, alpha=alpha)
    if delta < 0:
        raise ValueError("delta must be >= 0")
    s = _task_survival(t, lam, alpha, delta)
    with np.errstate(divide="ignore"):
        out = -np.expm1(k * np.log1p(-np.minimum(s, 1.0)))
    out = np.where(s >= 1.0, 1.0, out)
    return out if out.ndim else float(out)


def relaunch_metrics(k: int, lam: float, alpha: float, delta: float) -> Metrics:
    k = _need_int("k", k, 1)
    _need_positive(lam=lam)
    _need_alpha_gt1(alpha)
    if delta < 0 or not math.isfinite(delta):
        raise ValueError(f"delta must be finite and >= 0, got {delta!r}")
    g = g_norelaunch(k, lam, alpha)
    if delta <= lam:
        cost = k * delta + k * lam * alpha / (alpha - 1.0)
        return Metrics(delta + g, cost, cost)
    _, p = _q_p(lam, alpha, delta)
    ET = delta * -math.expm1(k * math.log1p(-p)) + g * (
        (lam / delta - 1.0) * reg_inc_beta(p, 1.0 - 1.0 / alpha, k) + 1.0
    )
    # no redundancy: nothing is left to cancel at completion
    cost = k * (lam * alpha * (1.0 + p) - p * delta) / (alpha - 1.0)
    return Metrics(ET, cost, cost)


@dataclass(frozen=True)
class RelaunchDerived:
    q: float
    g: float
    delta_star: float
    p_star: float
    alpha_sufficient: float
    delta_exact: float
    E_T_at_exact: float


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_min(f: Callable[[float], float], a: float, b: float,
                       tol: float = 1e-10, maxiter: int = 500) -> tuple[float, float]:
    """Minimize a unimodal f on [a, b]; returns (argmin, min)."""
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(maxiter):
        if abs(b - a) <= tol * max(1.0, abs(c) + abs(d)):
            x = 0.5 * (a + b)
            return x, f(x)
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    raise ConvergenceError(f"golden-section search did not converge on [{a}, {b}]")


def opt_relaunch(k: int, lam: float, alpha: float) -> RelaunchDerived:
    """Approximate and numerically exact latency-optimal relaunch delay."""
    k = _need_int("k", k, 1)
    g = g_norelaunch(k, lam, alpha)
    delta_star = math.sqrt(lam * g)
    p_star = gamma(1.0 - 1.0 / alpha) ** (-alpha / 2.0) / math.sqrt(k + 1.0)
    q = _q_p(lam, alpha, delta_star)[0]

    def et(d):
        return relaunch_metrics(k, lam, alpha, d).E_T

    hi = max(100.0 * delta_star, 100.0 * lam)
    grid = lam * np.exp(np.linspace(0.0, math.log(hi / lam), 400))[1:]
    vals = [et(d) for d in grid]
    i = int(np.argmin(vals))
    if i == len(grid) - 1:
        raise ConvergenceError(
            f"latency keeps falling up to delta={hi:g}; no finite optimal relaunch delay"
        )
    lo_b = grid[i - 1] if i > 0 else lam
    d_exact, et_exact = golden_section_min(et, lo_b, grid[i + 1])
    return RelaunchDerived(q, g, delta_star, p_star, math.log(k + 1.0) / math.log(4.0), d_exact, et_exact)


# -- redundancy together with relaunch -------------------------------------

def relaunch_replicated_metrics(k: int, c: int, delta: float, lam: float, alpha: float) -> Metrics:
    """Remaining tasks at ``delta`` restart as c+1 fresh clones each."""
    k = _need_int("k", k, 1)
    c = _need_int("c", c, 0)
    _need_positive(lam=lam)
    _need_alpha_gt1(alpha)
    if delta < 0 or not math.isfinite(delta):
        raise ValueError(f"delta must be finite and >= 0, got {delta!r}")
    at = (c + 1) * alpha
    clone_cancel = lam * (c + 1) * at / (at - 1.0)
    clone_full = lam * (c + 1) * alpha / (alpha - 1.0)
    if delta <= lam:
        return Metrics(
            delta + g_norelaunch(k, lam, at),
            k * delta + k * clone_cancel,
            k * delta + k * clone_full,
        )
    _, p = _q_p(lam, alpha, delta)
    b, bt = 1.0 / alpha, 1.0 / at
    ET = (
        delta * -math.expm1(k * math.log1p(-p))
        + g_norelaunch(k, lam, alpha) * (1.0 - reg_inc_beta(p, 1.0 - b, k))
        + g_norelaunch(k, lam, at) * p ** bt * reg_inc_beta(p, 1.0 - bt, k)
    )
    pre = k * alpha / (alpha - 1.0) * (lam - delta * p) + k * p * delta
    return Metrics(ET, pre + k * p * clone_cancel, pre + k * p * clone_full)


def _binomial_pmf(k: int, q: float, p: float) -> np.ndarray:
    if q == 0.0:
        w = np.zeros(k + 1)
        w[0] = 1.0
        return w
    r = np.arange(k + 1)
    logc = np.array([log_gamma(k + 1.0) - log_gamma(i + 1.0) - log_gamma(k - i + 1.0) for i in r])
    return np.exp(logc + r * math.log(q) + (k - r) * math.log(p))


def relaunch_coded_metrics(k: int, n: int, delta: float, lam: float, alpha: float) -> Metrics:
    """Remaining tasks restart at ``delta`` and n-k parity tasks join them.

    With R early finishers, the job then needs k-R of the n-R fresh tasks,
    so the post-delta part is a coded (k-R, n-R) system.
    """
    k = _need_int("k", k, 1)
    n = _need_int("n", n, k)
    _need_positive(lam=lam)
    _need_alpha_gt1(alpha)
    if delta < 0 or not math.isfinite(delta):
        raise ValueError(f"delta must be finite and >= 0, got {delta!r}")
    if delta <= lam:
        zd = zd_coded_pareto(k, n, lam, alpha)
        return Metrics(delta + zd.E_T, k * delta + zd.E_C_cancel, k * delta + zd.E_C_nocancel)
    q, p = _q_p(lam, alpha, delta)
    b = 1.0 / alpha
    w = _binomial_pmf(k, q, p)
    qk = float(w[k])
    denom = beta_ext(n - k + 1.0, -b)
    # latency of the fresh (k-r, n-r) coded system, r = 0..k-1
    lat = np.array([lam * beta_ext(n - r + 1.0, -b) / denom for r in range(k)])
    g = g_norelaunch(k, lam, alpha)
    ET = delta * (1.0 - qk) + g * reg_inc_beta(q, float(k), 1.0 - b) + math.fsum(w[:k] * lat)
    pre = k * (lam * alpha / (alpha - 1.0) - p * delta * alpha / (alpha - 1.0) + p * delta)
    r = np.arange(k)
    post_cancel = (lam * (n - r) * alpha - (n - k) * lat) / (alpha - 1.0)
    C_cancel = pre + math.fsum(w[:k] * post_cancel)
    C_full = alpha / (alpha - 1.0) * lam * (k * (p + qk) + n * (1.0 - qk)) - k * delta * p / (alpha - 1.0)
    return Metrics(ET, C_cancel, C_full)


def mean_field_replicated_latency(k: int, c: int, delta: float, lam: float, alpha: float) -> float:
    """Approximation that replaces the early-finisher count by its mean kq.

    Kept for comparison only; ``relaunch_replicated_metrics`` is exact.
    """
    if delta <= lam:
        return relaunch_replicated_metrics(k, c, delta, lam, alpha).E_T
    q, _ = _q_p(lam, alpha, delta)

    def term(a):
        ib = 1.0 / a
        return lam * gamma_ratio([1.0 - ib], [-ib]) * beta_ext(k - k * q + 1.0, -ib)

    return term((c + 1) * alpha) - term(alpha) + relaunch_metrics(k, lam, alpha, delta).E_T


def mean_field_coded_latency(k: int, n: int, delta: float, lam: float, alpha: float) -> float:
    """Mean-substituted counterpart of ``relaunch_coded_metrics(...).E_T``."""
    if delta <= lam:
        return relaunch_coded_metrics(k, n, delta, lam, alpha).E_T
    q, _ = _q_p(lam, alpha, delta)
    b = 1.0 / alpha
    qk = _q_pow_k(1.0 - q, k)
    g = g_norelaunch(k, lam, alpha)
    return (
        delta * (1.0 - qk)
        + lam * (beta_ext(n - k * q + 1.0, -b) / beta_ext(n - k + 1.0, -b) - qk)
        + g * reg_inc_beta(q, float(k), 1.0 - b)
    )


# -- dispatch ---------------------------------------------------------------

def evaluate(plan: RedundancyPlan, model: TaskTimeModel, second_moments: bool = False) -> Metrics:
    """Closed-form Metrics for a plan, or UnsupportedCombination."""
    p = plan.canonical()
    if isinstance(model, Empirical):
        raise UnsupportedCombination("no closed form for empirical task times; simulate instead")
    zero_delay = p.delay == 0 or (p.mode is Mode.NONE and not p.relaunch)
    if isinstance(model, ShiftedExp):
        if p.relaunch:
            raise UnsupportedCombination(
                "relaunch formulas exist only for Pareto task times, not shifted-exponential"
            )
        if not zero_delay:
            raise UnsupportedCombination("no closed form for delayed redundancy without relaunch")
        D = model.shift * p.k
        c, n = _redundancy_args(p)
        if second_moments:
            return second_moments_sexp(p.k, D, model.rate, c=c, n=n)
        if n is not None:
            return zd_coded_sexp(p.k, n, D, model.rate)
        return zd_replicated_sexp(p.k, c, D, model.rate)
    lam, alpha = model.scale, model.alpha
    if p.relaunch:
        if p.mode is Mode.CODE:
            return relaunch_coded_metrics(p.k, p.n, p.delay, lam, alpha)
        if p.mode is Mode.REPLICATE:
            return relaunch_replicated_metrics(p.k, p.c, p.delay, lam, alpha)
        return relaunch_metrics(p.k, lam, alpha, p.delay)
    if not zero_delay:
        raise UnsupportedCombination("no closed form for delayed redundancy without relaunch")
    c, n = _redundancy_args(p)
    base = zd_coded_pareto(p.k, n, lam, alpha) if n is not None else zd_replicated_pareto(p.k, c, lam, alpha)
    if second_moments:
        try:
            return second_moments_pareto(p.k, lam, alpha, c=c, n=n)
        except MomentExistenceError:
            return base
    return base


def _redundancy_args(p: RedundancyPlan) -> tuple[Optional[int], Optional[int]]:
    if p.mode is Mode.CODE:
        return None, p.n
    return (p.c if p.mode is Mode.REPLICATE else 0), None
