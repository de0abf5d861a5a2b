import json
import math
import random
from fractions import Fraction as F

import pytest

from newcombnet.errors import InvalidProfile, NewcombNetError
from newcombnet.netgame import expected_payoff, joint_from_net
from newcombnet.newcomb import (
    CHOICES as S,
    GameKind,
    Scenario,
    canonical_scenario,
    fearful_net,
    fearful_profile,
    payoff_table,
    realist_net,
    realist_profile,
    simulate,
    solve_combined_constrained,
    solve_fearful,
    solve_realist,
    solve_variant_choose_game,
    time_reverse,
)
from newcombnet.prob import alpha_accurate_cpd, delta, make_dist, uniform

AB, B = delta(S, "AB"), delta(S, "B")


def pgb(p):
    return make_dist(S, [1 - p, p])


def test_canonical_payoffs():
    pay = canonical_scenario().payoff
    assert pay[{"g": "B", "y": "AB"}] == 1_001_000
    assert pay[{"g": "AB", "y": "B"}] == 0
    assert pay[{"g": "AB", "y": "AB"}] == 1000
    assert pay[{"g": "B", "y": "B"}] == 1_000_000
    for g in S:
        assert pay[{"g": g, "y": "AB"}] - pay[{"g": g, "y": "B"}] == 1000


def test_solve_fearful():
    s = canonical_scenario()
    r = solve_fearful(s, 1)
    assert r.strategy == B and r.expected_value == 1_000_000 and not r.derived
    r = solve_fearful(s, F(1, 2))
    assert r.strategy == AB and r.expected_value == 501_000 and r.derived


def test_fearful_switch_point():
    # 1_000_000 a = 1000 a + 1_001_000 (1 - a)  =>  a = 1_001_000 / 2_000_000
    a = F(1_001_000, 2_000_000)
    assert a == F(1001, 2000)
    r = solve_fearful(canonical_scenario(), a)
    assert set(r.tie_set) == {AB, B}
    assert r.expected_value == 1_000_000 * a == 500_500
    assert solve_fearful(canonical_scenario(), a + F(1, 10**6)).strategy == B
    assert solve_fearful(canonical_scenario(), a - F(1, 10**6)).strategy == AB


@pytest.mark.parametrize("pg,value", [(AB, 1000), (B, 1_001_000), (uniform(S), 501_000)])
def test_solve_realist(pg, value):
    r = solve_realist(canonical_scenario(), pg)
    assert r.strategy == AB and r.expected_value == value


def test_combined_constrained():
    r = solve_combined_constrained(canonical_scenario())
    assert r.strategy == B and r.expected_value == 1_000_000
    r = solve_combined_constrained(canonical_scenario(F(3, 4)))
    assert r.strategy == B and r.expected_value == 750_000
    # the losing delta, evaluated by hand on the 2x2 table with z_AB = 1
    assert F(3, 4) * 1000 + F(1, 4) * 1_001_000 == 251_000


def test_combined_constant_payoff_ties():
    s = canonical_scenario()
    flat = Scenario(s.y_space, s.g_space, payoff_table((7, 7, 7, 7)), s.alpha, s.pg)
    r = solve_combined_constrained(flat)
    assert set(r.tie_set) == {AB, B} and r.strategy == AB


def test_combined_at_half_uses_vertices():
    r = solve_combined_constrained(canonical_scenario(F(1, 2)))
    assert r.derived
    assert r.strategy == AB and r.expected_value == 501_000


def test_variant():
    s = canonical_scenario()
    v = solve_variant_choose_game(s, pgb(F(9995, 10000)))
    assert v.chosen is GameKind.REALIST and v.recommendation.strategy == AB and not v.tie
    v = solve_variant_choose_game(s, pgb(F(998, 1000)))
    assert v.chosen is GameKind.FEARFUL and v.recommendation.strategy == B
    v = solve_variant_choose_game(s, pgb(F(999, 1000)))
    assert v.tie and v.chosen is GameKind.FEARFUL
    assert 1000 * F(1, 1000) + 1_001_000 * F(999, 1000) == 1_000_000
    assert v.fearful.expected_value == v.realist.expected_value == 1_000_000


def test_variant_sign_change_exactly_at_threshold():
    s = canonical_scenario()
    fearful = solve_fearful(s, 1).expected_value
    signs = []
    for k in range(990, 1001):
        p = F(k, 1000)
        d = fearful - solve_realist(s, pgb(p)).expected_value
        signs.append((p, (d > 0) - (d < 0)))
    assert [p for p, sg in signs if sg == 0] == [F(999, 1000)]
    assert all(sg > 0 for p, sg in signs if p < F(999, 1000))
    assert all(sg < 0 for p, sg in signs if p > F(999, 1000))


def test_recommendation_value_recomputed_independently():
    s = canonical_scenario(F(7, 9), make_dist(S, [F(2, 11), F(9, 11)]))
    r = solve_fearful(s)
    j = joint_from_net(fearful_net(), fearful_profile(r.strategy, alpha_accurate_cpd(s.alpha, S)))
    assert r.expected_value == expected_payoff(j, s.payoff)
    r = solve_realist(s)
    j = joint_from_net(realist_net(), realist_profile(s.pg, r.strategy))
    assert r.expected_value == expected_payoff(j, s.payoff)


def test_time_reverse():
    s = canonical_scenario()
    rev = time_reverse(s)
    assert rev.timeline == ("choose", "predict")
    assert time_reverse(rev) == s
    for solve in (solve_fearful, solve_realist, solve_combined_constrained):
        assert json.dumps(solve(s).to_json()) == json.dumps(solve(rev).to_json())
    p = pgb(F(9995, 10000))
    a, b = solve_variant_choose_game(s, p), solve_variant_choose_game(rev, p)
    assert a.chosen is b.chosen is GameKind.REALIST
    assert a.to_json() == b.to_json()


def test_scenario_json_round_trip():
    s = canonical_scenario(F(3, 4), pgb(F(1, 3)))
    doc = s.to_json()
    assert doc["alpha"] == "3/4"
    assert Scenario.from_json(json.loads(json.dumps(doc))) == s


@pytest.mark.parametrize("doc", [
    {"timeline": ["predict", "predict"]},
    {"payoff": [1, 2, 3]},
    {"alpha": "3/2"},
    {"pg": ["1/2", "1/3"]},
    {"y_space": ["x", "y"]},
    {"payoff": [1.5, 2, 3, 4]},
])
def test_scenario_rejects_bad_documents(doc):
    with pytest.raises(NewcombNetError):
        Scenario.from_json(doc)


def test_simulate_deterministic_joint():
    s = canonical_scenario()
    st = simulate(s, "FEARFUL", fearful_profile(B, alpha_accurate_cpd(1, S)), 1000, 3)
    assert st.mean_payoff == 1_000_000 and st.accuracy == 1


def test_simulate_accuracy_within_3_sigma():
    a, n = F(3, 4), 10**6
    st = simulate(canonical_scenario(), GameKind.FEARFUL,
                  fearful_profile(uniform(S), alpha_accurate_cpd(a, S)), n, 7)
    assert abs(st.accuracy - 0.75) <= 3 * math.sqrt(0.75 * 0.25 / n)
    assert st.analytic_accuracy == a


def test_simulate_realist_payoff_within_3_sigma():
    n = 10**6
    st = simulate(canonical_scenario(), "REALIST", realist_profile(uniform(S), AB), n, 11)
    # two-point payoff {1000, 1_001_000} with equal weights
    mean = (1000 + 1_001_000) / 2
    sd = math.sqrt(((1000 - mean) ** 2 + (1_001_000 - mean) ** 2) / 2)
    assert mean == 501_000
    assert abs(st.mean_payoff - mean) <= 3 * sd / math.sqrt(n)


def test_simulate_reproducible():
    prof = fearful_profile(uniform(S), alpha_accurate_cpd(F(3, 4), S))
    a = simulate(canonical_scenario(), "FEARFUL", prof, 5000, 42)
    b = simulate(canonical_scenario(), "FEARFUL", prof, 5000, 42)
    assert json.dumps(a.to_json()) == json.dumps(b.to_json())
    assert a.to_json()["generator"] == "numpy.random.PCG64"


def test_simulate_invalid():
    with pytest.raises(InvalidProfile):
        simulate(canonical_scenario(), "FEARFUL", {"y": B}, 10, 1)
    with pytest.raises(InvalidProfile):
        simulate(canonical_scenario(), "FEARFUL", fearful_profile(B, alpha_accurate_cpd(1, S)), 0, 1)
    with pytest.raises(InvalidProfile):
        simulate(canonical_scenario(), "COMBINED", {}, 10, 1)


def test_timeline_never_read():
    # Scramble the timeline through every permutation; outputs must not move.
    rng = random.Random(5)
    s = canonical_scenario(F(rng.randint(0, 20), 20), pgb(F(rng.randint(0, 20), 20)))
    outs = set()
    for tl in (("predict", "choose"), ("choose", "predict")):
        t = Scenario(s.y_space, s.g_space, s.payoff, s.alpha, s.pg, tl)
        outs.add(json.dumps([solve_fearful(t).to_json(), solve_realist(t).to_json(),
                             solve_combined_constrained(t).to_json(),
                             solve_variant_choose_game(t).to_json()]))
    assert len(outs) == 1
