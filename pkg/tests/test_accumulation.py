import math

import numpy as np
import pytest
from scipy.integrate import quad

from paraest.accumulation import (AccumulatorState, DEFAULT_PSET, DOMAIN_L1,
                                  DOMAIN_L2, INF, LpAccumulator,
                                  accumulation_coefficient, domain_weight,
                                  lp_update, parse_pset,
                                  synthetic_accumulation_study, total_estimate,
                                  weighted_min_accumulation)
from paraest.estimators import ConstantsConfig, StepEstimate
from paraest.timestepping import SchemeKind


def quad_oracle(p, r, alpha):
    """|| e^{alpha (s-r)} ||_{L^q(0,r)} by adaptive quadrature / grid max."""
    if p == 1:
        s = np.linspace(0.0, r, 20001)
        return float(np.exp(alpha * (s - r)).max()) if r > 0 else 1.0
    q = 1.0 if p == INF else p / (p - 1.0)
    val, _ = quad(lambda s: math.exp(alpha * (s - r)) ** q, 0.0, r,
                  epsabs=1e-14, epsrel=1e-13, limit=200)
    return val ** (1.0 / q)


def test_coefficient_p1_is_one():
    for r in (0.0, 0.3, 10.0):
        for alpha in (0.0, 1.0, 7.5):
            assert accumulation_coefficient(1, r, alpha) == 1.0


def test_coefficient_examples():
    # p = inf, alpha = 1, r = ln 2 -> 1 - e^{-ln 2} = 1/2
    assert accumulation_coefficient(INF, math.log(2.0), 1.0) == pytest.approx(0.5, rel=1e-14)
    # p = 2 (q = 2), alpha = 1, r -> inf: (1/2)^{1/2}
    assert accumulation_coefficient(2, 1e6, 1.0) == pytest.approx(math.sqrt(0.5), rel=1e-12)
    # alpha = 0 limit: r^{1/q}
    assert accumulation_coefficient(2, 4.0, 0.0) == pytest.approx(2.0, rel=1e-14)
    assert accumulation_coefficient(INF, 4.0, 0.0) == pytest.approx(4.0, rel=1e-14)


def test_coefficient_rejects_bad_input():
    with pytest.raises(ValueError):
        accumulation_coefficient(2, -1.0, 1.0)
    with pytest.raises(ValueError):
        accumulation_coefficient(0.5, 1.0, 1.0)
    with pytest.raises(ValueError):
        accumulation_coefficient(2, 1.0, -0.1)


def test_coefficient_matches_quadrature():
    for p in (1, 1.5, 2, 4, INF):
        for r in (0.1, 1.0, 10.0):
            for alpha in (0.0, 1.0, 1.5):
                closed = accumulation_coefficient(p, r, alpha)
                assert closed == pytest.approx(quad_oracle(p, r, alpha), rel=1e-10)


def test_coefficient_monotone_and_bounded():
    rs = np.linspace(0.01, 20.0, 50)
    for p in (1.5, 2, 8, INF):
        q = 1.0 if p == INF else p / (p - 1.0)
        vals = [accumulation_coefficient(p, r, 1.5) for r in rs]
        assert np.all(np.diff(vals) >= -1e-15)
        for r, v in zip(rs, vals):
            assert v <= min(r ** (1.0 / q), (1.0 / (q * 1.5)) ** (1.0 / q)) + 1e-12


def test_lp_update_ones_stream():
    # F = 1: ||F||_{L^p(0, t_m)} = t_m^{1/p}; exact in binary for tau = 1/8
    tau = 0.125
    for p in DEFAULT_PSET:
        acc = LpAccumulator((p,))
        for m in range(1, 81):
            acc.update(1.0, tau)
            t_m = m * tau
            expected = 1.0 if p == INF else t_m ** (1.0 / p)
            assert acc.value(p) == expected


def test_lp_update_max_semantics():
    acc = LpAccumulator((INF,))
    for F in (3.0, 1.0, 2.0):
        acc.update(F, 0.1)
    assert acc.value(INF) == 3.0


def test_lp_update_matches_direct_summation():
    rng = np.random.default_rng(123)
    F = rng.uniform(0.0, 5.0, size=50)
    tau = 0.07
    acc = LpAccumulator(DEFAULT_PSET)
    for v in F:
        acc.update(float(v), tau)
    for p in DEFAULT_PSET:
        if p == INF:
            direct = F.max()
        else:
            direct = (tau * np.sum(F ** p)) ** (1.0 / p)
        assert acc.value(p) == pytest.approx(direct, rel=1e-12)


def test_lp_update_one_shot_matches_accumulator():
    vals = [0.3, 1.2, 0.2]
    running = 0.0
    acc = LpAccumulator((4.0,))
    for v in vals:
        running = lp_update(running, 4.0, v, 0.1)
        acc.update(v, 0.1)
    assert running == pytest.approx(acc.value(4.0), rel=1e-13)
    with pytest.raises(ValueError):
        lp_update(0.0, 2.0, -1.0, 0.1)


def test_weighted_min_single_p():
    acc = LpAccumulator((2.0,))
    acc.update(3.0, 0.5)
    val, p = weighted_min_accumulation(acc, DOMAIN_L1, 0.5, 0.0, use_weights=False)
    assert p == 2.0 and val == pytest.approx(acc.value(2.0))


def test_unweighted_ones_min_profile():
    # min_p ||1||_{L^p(0,t)} = t for t <= 1, then 1 (from p = inf)
    acc = LpAccumulator(DEFAULT_PSET)
    tau = 0.125
    t = 0.0
    while t < 2.0 - 1e-12:
        acc.update(1.0, tau)
        t += tau
        val, p = weighted_min_accumulation(acc, DOMAIN_L1, t, 0.0, use_weights=False)
        if t < 1.0:
            assert val == pytest.approx(t, rel=1e-13) and p == 1.0
        elif t > 1.0:
            assert val == pytest.approx(1.0, rel=1e-13) and p == INF
        else:
            assert p == INF   # tie resolves toward larger p


def test_weighted_random_stream_argmin_migrates_up():
    rng = np.random.default_rng(2)
    acc = LpAccumulator(DEFAULT_PSET)
    tau, alpha = 0.1, 1.0
    argmins, l1_vals, min_vals = [], [], []
    t = 0.0
    for F in rng.uniform(0.0, 10.0, size=150):
        acc.update(float(F), tau)
        t += tau
        val, p = weighted_min_accumulation(acc, DOMAIN_L1, t, alpha)
        argmins.append(p)
        l1_vals.append(domain_weight(1.0, DOMAIN_L1, t, alpha) * acc.value(1.0))
        min_vals.append(val)
    assert argmins[-1] >= argmins[5]
    assert l1_vals[-1] == max(l1_vals[-1], min_vals[-1])
    assert l1_vals[-1] > 3 * min_vals[-1]   # L1-type grows much larger by t = 15


def test_domain_weight_l2_branch():
    # weight on [2, inf] is sqrt(c_{p/2}); p = 2 gives sqrt(c_1) = 1
    assert domain_weight(2.0, DOMAIN_L2, 5.0, 1.0) == 1.0
    w = domain_weight(INF, DOMAIN_L2, 5.0, 1.0)
    assert w == pytest.approx(math.sqrt(accumulation_coefficient(INF, 5.0, 1.0)))


def test_bounded_stream_infinity_accumulation_bound():
    # c_{inf,t} * max F <= B (1 - e^{-alpha t}) / alpha <= B / alpha
    B, alpha, tau = 7.0, 1.5, 0.05
    rng = np.random.default_rng(8)
    acc = LpAccumulator((INF,))
    t = 0.0
    for F in rng.uniform(0.0, B, size=400):
        acc.update(float(F), tau)
        t += tau
        weighted = accumulation_coefficient(INF, t, alpha) * acc.value(INF)
        assert weighted <= B * (1.0 - math.exp(-alpha * t)) / alpha + 1e-12
        assert weighted <= B / alpha + 1e-12


def _state_with_random_steps(scheme, n_steps, seed=0):
    rng = np.random.default_rng(seed)
    state = AccumulatorState(scheme=scheme, init_error=0.01)
    totals = {s: [] for s in ("min", "l1", "l2", "linf")}
    cc = ConstantsConfig()
    for k in range(n_steps):
        vals = rng.uniform(0.0, 2.0, size=6)
        est = StepEstimate(n=k + 1, space=vals[0], time=vals[1], data_time=vals[2],
                           data_space=vals[3], elliptic=vals[4], time_recon=vals[5])
        state.update(est, 0.1)
        rep = total_estimate(state, cc)
        for s in totals:
            totals[s].append(rep.totals[s])
    return state, totals


def test_total_estimate_ordering_and_monotonicity():
    for scheme in SchemeKind:
        state, totals = _state_with_random_steps(scheme, 120)
        tm = np.array(totals["min"])
        for s in ("l1", "l2", "linf"):
            assert np.all(tm <= np.array(totals[s]) + 1e-12)
        assert np.all(np.diff(tm) >= -1e-12)   # min total is non-decreasing


def test_total_estimate_zero_state():
    state = AccumulatorState(scheme=SchemeKind.CRANK_NICOLSON)
    rep = total_estimate(state, ConstantsConfig())
    assert all(v == 0.0 for v in rep.totals.values())


def test_report_per_p_table_consistent_with_min():
    state, _ = _state_with_random_steps(SchemeKind.CRANK_NICOLSON, 30)
    rep = total_estimate(state, ConstantsConfig())
    for name, table in rep.term_values.items():
        assert rep.term_min[name] == min(table.values())
        assert table[rep.term_argmin[name]] == rep.term_min[name]
    # energy-tested CN terms only admit p >= 2
    assert 1.0 not in rep.term_values["time"]
    assert 1.0 in rep.term_values["space"]


def test_be_report_ignores_time_recon():
    est = StepEstimate(n=1, space=0.0, time=0.0, data_time=0.0, data_space=0.0,
                       elliptic=0.0, time_recon=5.0)
    state = AccumulatorState(scheme=SchemeKind.BACKWARD_EULER)
    state.update(est, 0.1)
    rep = total_estimate(state, ConstantsConfig())
    assert rep.totals["min"] == 0.0   # BE total has no reconstruction term


def test_synthetic_study_ones():
    table = synthetic_accumulation_study("ones", alpha=1.0)
    t = table["t"]
    for p in DEFAULT_PSET:
        if p != INF:
            assert np.allclose(table["raw"][p], t ** (1.0 / p), rtol=1e-12)
    winf = table["weighted"][INF]
    assert np.allclose(winf, 1.0 - np.exp(-t), rtol=1e-12)
    # the weighted L-infinity accumulation is the smallest for all t
    for p in DEFAULT_PSET[:-1]:
        assert np.all(winf <= table["weighted"][p] + 1e-12)


def test_synthetic_study_large_initial():
    rnd = synthetic_accumulation_study("random", seed=4)
    big = synthetic_accumulation_study("large_initial", seed=4)
    l1_change = abs(big["raw"][1.0][-1] / rnd["raw"][1.0][-1] - 1.0)
    assert l1_change < 0.05                    # barely moves the L1 column
    assert big["raw"][INF][-1] / rnd["raw"][INF][-1] > 2.0   # large p jumps
    with pytest.raises(ValueError):
        synthetic_accumulation_study("bogus")


def test_parse_pset():
    assert parse_pset("1, 2, inf") == (1.0, 2.0, INF)
    with pytest.raises(ValueError):
        parse_pset("0.5,2")
