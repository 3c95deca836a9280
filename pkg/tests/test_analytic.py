import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special, stats

from stragglers import analytic as an
from stragglers.distributions import Empirical, Pareto, ShiftedExp
from stragglers.plan import Mode, RedundancyPlan


# -- independent oracles ----------------------------------------------------

def pareto_order_stat_mean(n, i, lam, alpha):
    """E[X_{n:i}] by integrating the survival of the i-th smallest of n."""
    def surv(t):
        F = 1.0 - (lam / t) ** alpha
        return stats.binom.cdf(i - 1, n, F)  # fewer than i done by t
    val, _ = integrate.quad(surv, lam, np.inf, limit=400)
    return lam + val


def pareto_joint_moment_quad(n, i, j, lam, alpha):
    """E[X_{n:i} X_{n:j}] via the joint density of uniform order statistics."""
    const = math.factorial(n) / (
        math.factorial(i - 1) * math.factorial(j - i - 1) * math.factorial(n - j))

    def f(v, u):
        x = lam * (1 - u) ** (-1 / alpha)
        y = lam * (1 - v) ** (-1 / alpha)
        return x * y * u ** (i - 1) * (v - u) ** (j - i - 1) * (1 - v) ** (n - j)

    val, _ = integrate.dblquad(f, 0, 1, lambda u: u, lambda u: 1, epsabs=1e-11, epsrel=1e-10)
    return const * val


# -- closed forms: worked values -------------------------------------------

def test_g_norelaunch_values():
    assert an.g_norelaunch(1, 1, 2) == pytest.approx(2.0)
    assert an.g_norelaunch(2, 1, 2) == pytest.approx(8 / 3)
    assert an.g_norelaunch(7, 2.5, math.inf) == 2.5


@pytest.mark.parametrize("k,alpha", [(1, 1.5), (3, 2.0), (10, 3.0), (25, 1.2)])
def test_g_norelaunch_against_quadrature(k, alpha):
    assert an.g_norelaunch(k, 1.0, alpha) == pytest.approx(pareto_order_stat_mean(k, k, 1.0, alpha), rel=1e-7)


def test_g_norelaunch_needs_finite_mean():
    with pytest.raises(ValueError):
        an.g_norelaunch(3, 1.0, 1.0)


def test_zero_delay_sexp_values():
    m = an.zd_replicated_sexp(1, 0, 1, 1)
    assert (m.E_T, m.E_C_cancel) == pytest.approx((2.0, 2.0))
    m = an.zd_replicated_sexp(4, 1, 4, 2)
    assert m.E_T == pytest.approx(1 + (25 / 12) / 4)
    assert m.E_C_cancel == pytest.approx(10.0)
    m = an.zd_coded_sexp(2, 2, 2, 1)
    assert (m.E_T, m.E_C_cancel) == pytest.approx((2.5, 4.0))
    m = an.zd_coded_sexp(2, 3, 2, 1)
    assert (m.E_T, m.E_C_cancel) == pytest.approx((1 + 1.5 + 1 / 3 - 1, 5.0))


def test_zero_delay_pareto_values():
    m = an.zd_replicated_pareto(1, 0, 1, 2)
    assert (m.E_T, m.E_C_cancel) == pytest.approx((2.0, 2.0))
    m = an.zd_replicated_pareto(2, 1, 1, 2)
    assert m.E_T == pytest.approx(2 * special.gamma(0.75) / special.gamma(2.75))
    assert m.E_C_cancel == pytest.approx(16 / 3)
    m = an.zd_coded_pareto(1, 1, 1, 2)
    assert (m.E_T, m.E_C_cancel) == pytest.approx((2.0, 2.0))
    assert an.zd_coded_pareto(10, 12, 1, 2).E_T == pytest.approx(2.33, abs=0.005)
    for k in (1, 4, 9):
        assert an.zd_coded_pareto(k, k, 1.5, 3.0).E_C_cancel == pytest.approx(k * 1.5 * 3 / 2)


@pytest.mark.parametrize("k,n,alpha", [(3, 5, 2.0), (10, 12, 2.0), (4, 4, 1.5), (5, 9, 3.0)])
def test_coded_pareto_against_order_statistics(k, n, alpha):
    m = an.zd_coded_pareto(k, n, 1.0, alpha)
    means = [pareto_order_stat_mean(n, i, 1.0, alpha) for i in range(1, k + 1)]
    assert m.E_T == pytest.approx(means[-1], rel=1e-7)
    # cancel at the k-th completion: k finished lifetimes plus n-k cut at X_{n:k}
    assert m.E_C_cancel == pytest.approx(sum(means) + (n - k) * means[-1], rel=1e-7)
    assert m.E_C_nocancel == pytest.approx(n * alpha / (alpha - 1))


# -- joint order-statistic moments -----------------------------------------

def test_joint_osm_exp_values():
    assert an.joint_osm_exp(1, 1, 1, 1) == pytest.approx(2.0)
    assert an.joint_osm_exp(2, 1, 2, 1) == pytest.approx(1.0)


def test_joint_osm_pareto_single_task():
    assert an.joint_osm_pareto(1, 1, 1, 1, 3) == pytest.approx(3.0)


@pytest.mark.parametrize("n,i,j,alpha", [(2, 1, 2, 3.0), (3, 1, 3, 3.0), (4, 2, 3, 2.5), (5, 2, 5, 3.0)])
def test_joint_osm_pareto_against_quadrature(n, i, j, alpha):
    assert an.joint_osm_pareto(n, i, j, 1.0, alpha) == pytest.approx(
        pareto_joint_moment_quad(n, i, j, 1.0, alpha), rel=1e-6)


def test_joint_osm_pareto_diagonal_is_second_moment():
    # E[X_{n:i}^2] by one-dimensional quadrature over the order statistic survival of X^2
    n, i, alpha = 4, 3, 3.0
    def surv(s):
        F = 1.0 - s ** (-alpha / 2)
        return stats.binom.cdf(i - 1, n, F)
    val, _ = integrate.quad(surv, 1.0, np.inf, limit=400)
    assert an.joint_osm_pareto(n, i, i, 1.0, alpha) == pytest.approx(1.0 + val, rel=1e-7)


def test_joint_osm_pareto_reports_missing_moment():
    with pytest.raises(an.MomentExistenceError):
        an.joint_osm_pareto(2, 2, 2, 1.0, 1.5)


def test_second_moments_worked_values():
    m = an.second_moments_pareto(1, 1.0, 3.0, c=0)
    assert m.E_T2 == pytest.approx(3.0)
    m = an.second_moments_pareto(2, 1.0, 3.0, c=1)
    assert m.E_T2 == pytest.approx(an.joint_osm_pareto(2, 2, 2, 1.0, 6.0))
    m = an.second_moments_sexp(1, 1.0, 1.0, c=0)
    # SExp(1,1): E[X^2] = Var + mean^2 = 1 + 4
    assert m.E_T2 == pytest.approx(5.0)
    assert m.E_C2 == pytest.approx(5.0)


def test_second_moments_sexp_match_direct_expansion():
    # k=2, n=3: cost = n*D/k + Y_{3:1} + Y_{3:2} + (n-k) Y_{3:2} with Y ~ Exp(mu)
    k, n, D, mu = 2, 3, 2.0, 1.0
    m = an.second_moments_sexp(k, D, mu, n=n)
    mom = lambda i, j: an.joint_osm_exp(n, min(i, j), max(i, j), mu)
    a = n * D / k
    EY1 = 1 / 3
    EY2 = 1 / 3 + 1 / 2
    EL = EY1 + 2 * EY2
    EL2 = mom(1, 1) + 4 * mom(1, 2) + 4 * mom(2, 2)
    assert m.E_C2 == pytest.approx(a * a + 2 * a * EL + EL2)
    assert m.E_T2 == pytest.approx((D / k) ** 2 + 2 * (D / k) * EY2 + mom(2, 2))


@given(st.integers(1, 8), st.integers(0, 3), st.floats(0.2, 5.0), st.floats(0.2, 5.0))
def test_second_moments_dominate_squared_means(k, extra, D, mu):
    for kw in ({"c": extra}, {"n": k + extra}):
        m = an.second_moments_sexp(k, D, mu, **kw)
        assert m.E_T2 >= m.E_T ** 2 * (1 - 1e-12)
        assert m.E_C2 >= m.E_C_cancel ** 2 * (1 - 1e-12)


# -- baseline-cost searches -------------------------------------------------

def brute_force_c_max(alpha: Fraction, cap=100):
    base = alpha / (alpha - 1)
    best = 0
    for c in range(cap + 1):
        at = (c + 1) * alpha
        if (c + 1) * at / (at - 1) <= base:
            best = c
    return best


@pytest.mark.parametrize("alpha", ["1.05", "1.1", "1.2", "1.25", "1.3", "1.4", "1.5", "2", "3"])
def test_c_max_matches_exact_brute_force(alpha):
    c_max, et = an.baseline_min_latency_replicated(10, 1.0, float(alpha))
    assert c_max == brute_force_c_max(Fraction(alpha))
    assert et == pytest.approx(an.zd_replicated_pareto(10, c_max, 1.0, float(alpha)).E_T)


def test_c_max_worked_values():
    assert an.baseline_min_latency_replicated(7, 1.0, 1.2)[0] == 4
    assert an.baseline_min_latency_replicated(7, 1.0, 1.4)[0] == 1
    c, et = an.baseline_min_latency_replicated(7, 1.0, 2.0)
    assert c == 0 and et == pytest.approx(an.g_norelaunch(7, 1.0, 2.0))


@pytest.mark.parametrize("k,alpha", [(10, 1.5), (5, 1.3), (2, 5.0)])
def test_coded_baseline_brute_force(k, alpha):
    res = an.baseline_min_latency_coded(k, 1.0, alpha)
    base = k * alpha / (alpha - 1)
    ok = [n for n in range(k, 50 * k + 1) if an.zd_coded_pareto(k, n, 1.0, alpha).E_C_cancel <= base * (1 + 1e-13)]
    assert res.n_max == max(ok)
    if res.n_max > k:
        assert res.E_T_min < res.upper_bound
    else:
        assert res.E_T_min == pytest.approx(an.g_norelaunch(k, 1.0, alpha))
        assert res.printed_lhs is None


def test_coded_baseline_large_alpha_has_no_gain():
    assert an.baseline_min_latency_coded(2, 1.0, 5.0).n_max == 2


# -- relaunch without redundancy -------------------------------------------

def test_relaunch_tail_basic_values():
    assert an.relaunch_tail(3, 1.0, 2.0, 2.0, 0.9) == 1.0
    assert an.relaunch_tail(3, 1.0, 2.0, 2.0, 1e12) == pytest.approx(0.0, abs=1e-12)


@given(st.integers(1, 50), st.floats(1.05, 4.0), st.floats(0.0, 20.0))
def test_relaunch_tail_is_a_survival_function(k, alpha, delta):
    t = np.linspace(0.0, 60.0, 400)
    s = an.relaunch_tail(k, 1.0, alpha, delta, t)
    assert np.all((s >= 0) & (s <= 1))
    assert np.all(np.diff(s) <= 1e-15)


@pytest.mark.parametrize("k,alpha,delta", [(3, 2.0, 0.5), (3, 2.0, 2.0), (3, 2.0, 5.0), (10, 1.5, 3.0), (50, 3.0, 2.5)])
def test_relaunch_tail_integrates_to_latency(k, alpha, delta):
    f = lambda t: an.relaunch_tail(k, 1.0, alpha, delta, t)
    pts = sorted({1.0, delta, delta + 1.0})
    val = sum(integrate.quad(f, a, b, limit=500)[0] for a, b in zip([0.0] + pts, pts)) + \
        integrate.quad(f, pts[-1], np.inf, limit=500)[0]
    assert val == pytest.approx(an.relaunch_metrics(k, 1.0, alpha, delta).E_T, rel=1e-6)


def test_relaunch_metrics_at_zero_delay_and_far_delay_agree():
    for k in (1, 10, 100):
        for alpha in (1.5, 2.0, 3.0):
            m0 = an.relaunch_metrics(k, 1.0, alpha, 0.0)
            assert m0.E_T == pytest.approx(an.g_norelaunch(k, 1.0, alpha))
            assert m0.E_C_cancel == pytest.approx(k * alpha / (alpha - 1))
            mf = an.relaunch_metrics(k, 1.0, alpha, 1e9)
            assert mf.E_T == pytest.approx(m0.E_T, rel=1e-3)
            assert mf.E_C_cancel == pytest.approx(m0.E_C_cancel, rel=1e-3)


def test_relaunch_metrics_continuous_at_scale():
    lo = an.relaunch_metrics(5, 1.0, 2.0, 1.0)
    hi = an.relaunch_metrics(5, 1.0, 2.0, 1.0 + 1e-9)
    assert hi.E_T == pytest.approx(lo.E_T, rel=1e-7)
    assert hi.E_C_cancel == pytest.approx(lo.E_C_cancel, rel=1e-7)


def test_opt_relaunch_worked_example():
    r = an.opt_relaunch(100, 1.0, 2.0)
    assert r.p_star == pytest.approx(0.06, abs=0.01)
    assert r.delta_star == pytest.approx(4.22, abs=0.01)
    assert r.delta_star == pytest.approx(r.delta_exact, rel=0.05)
    assert an.opt_relaunch(15, 1.0, 2.0).alpha_sufficient == 2.0


def test_golden_section_min():
    x, fx = an.golden_section_min(lambda t: (t - 1.3) ** 2 + 2, 0, 5)
    assert x == pytest.approx(1.3, abs=1e-6) and fx == pytest.approx(2.0)


# -- redundancy with relaunch ----------------------------------------------

def test_relaunch_redundancy_degenerate_cases():
    k, lam, alpha = 10, 1.0, 2.0
    assert an.relaunch_replicated_metrics(k, 1, 0.0, lam, alpha).E_T == pytest.approx(
        an.zd_replicated_pareto(k, 1, lam, alpha).E_T)
    for d in (0.3, 1.0):
        assert an.relaunch_coded_metrics(k, 12, d, lam, alpha).E_T == pytest.approx(
            d + an.zd_coded_pareto(k, 12, lam, alpha).E_T)
    # c = 0 and n = k reduce to plain relaunch
    for d in (0.5, 2.0, 5.0):
        base = an.relaunch_metrics(k, lam, alpha, d)
        for m in (an.relaunch_replicated_metrics(k, 0, d, lam, alpha),
                  an.relaunch_coded_metrics(k, k, d, lam, alpha)):
            assert (m.E_T, m.E_C_cancel) == pytest.approx((base.E_T, base.E_C_cancel), rel=1e-10)


def test_relaunch_redundancy_exact_on_small_case():
    # k=2 enumerated over the number of early finishers, each fresh system evaluated directly
    k, n, lam, alpha, d = 2, 4, 1.0, 2.0, 3.0
    p = (lam / d) ** alpha
    q = 1 - p
    # r = 2: latency = E[max of two early finishers]
    F = lambda t: (1 - (lam / t) ** alpha) / q
    emax = d - integrate.quad(lambda t: F(t) ** 2, lam, d)[0]
    lat = (p * p * (d + an.coded_latency_pareto(2, 4, lam, alpha))
           + 2 * p * q * (d + an.coded_latency_pareto(1, 3, lam, alpha))
           + q * q * emax)
    assert an.relaunch_coded_metrics(k, n, d, lam, alpha).E_T == pytest.approx(lat, rel=1e-9)


def test_mean_field_forms_close_but_not_exact():
    exact = an.relaunch_coded_metrics(10, 11, 3.0, 1.0, 2.0).E_T
    approx = an.mean_field_coded_latency(10, 11, 3.0, 1.0, 2.0)
    assert approx == pytest.approx(exact, rel=0.1)
    assert approx != pytest.approx(exact, rel=1e-6)


# -- dispatch ---------------------------------------------------------------

def test_evaluate_dispatch_and_canonical_forms():
    model = Pareto(1.0, 2.0)
    base = an.evaluate(RedundancyPlan(5), model)
    for plan in (RedundancyPlan(5, Mode.REPLICATE, c=0), RedundancyPlan(5, Mode.CODE, n=5),
                 RedundancyPlan(5, Mode.CODE, n=8, delay=math.inf)):
        assert an.evaluate(plan, model) == base
    assert base.E_T == pytest.approx(an.g_norelaunch(5, 1.0, 2.0))


def test_evaluate_sexp_uses_job_level_shift():
    m = an.evaluate(RedundancyPlan(4, Mode.REPLICATE, c=1), ShiftedExp(1.0, 2.0))
    assert m == an.zd_replicated_sexp(4, 1, 4.0, 2.0)


@pytest.mark.parametrize("plan,model", [
    (RedundancyPlan(3, relaunch=True, delay=1.0), ShiftedExp(1.0, 1.0)),
    (RedundancyPlan(3, Mode.CODE, n=4, delay=2.0), Pareto(1.0, 2.0)),
    (RedundancyPlan(3), Empirical.from_values([1.0, 2.0])),
])
def test_evaluate_unsupported(plan, model):
    with pytest.raises(an.UnsupportedCombination):
        an.evaluate(plan, model)


def test_evaluate_second_moments_fall_back_when_infinite():
    m = an.evaluate(RedundancyPlan(3), Pareto(1.0, 1.5), second_moments=True)
    assert m.E_T2 is None
    m = an.evaluate(RedundancyPlan(3), Pareto(1.0, 3.0), second_moments=True)
    assert m.E_T2 is not None


# -- monotonicity -------------------------------------------------------------

@given(st.integers(1, 30), st.floats(1.1, 5.0))
def test_coding_latency_decreases_with_parity(k, alpha):
    lats = [an.zd_coded_pareto(k, n, 1.0, alpha).E_T for n in range(k, k + 6)]
    assert all(b < a for a, b in zip(lats, lats[1:]))


@given(st.integers(1, 30), st.floats(1.1, 5.0))
def test_replication_latency_decreases_with_clones(k, alpha):
    lats = [an.zd_replicated_pareto(k, c, 1.0, alpha).E_T for c in range(4)]
    assert all(b < a for a, b in zip(lats, lats[1:]))


@given(st.integers(1, 20), st.integers(0, 3), st.floats(0.5, 4.0), st.floats(0.2, 3.0))
def test_cancellation_never_costs_more(k, extra, D, mu):
    for m in (an.zd_replicated_sexp(k, extra, D, mu), an.zd_coded_sexp(k, k + extra, D, mu),
              an.zd_replicated_pareto(k, extra, 1.0, 1.0 + mu),
              an.zd_coded_pareto(k, k + extra, 1.0, 1.0 + mu)):
        assert m.E_C_cancel <= m.E_C_nocancel * (1 + 1e-12)
