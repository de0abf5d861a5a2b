import itertools
from fractions import Fraction as F

import pytest

from newcombnet.consistency import (
    ExtendedGame,
    FeasibleSet,
    NoSolution,
    Table2Param,
    accuracy_violation_witness,
    check_profile,
    independence_cross_terms,
    feasible_g_independent,
    feasible_g_independent_oracle,
    induced_prediction_marginal,
)
from newcombnet.errors import OutOfRange, VariableMismatch
from newcombnet.netgame import BayesNet, NetNode, joint_from_net
from newcombnet.newcomb import (
    CHOICES as S,
    fearful_net,
    fearful_profile,
    realist_net,
    realist_profile,
)
from newcombnet.prob import Cpd, OutcomeSpace, alpha_accurate_cpd, delta, make_dist, uniform

AB, B = delta(S, "AB"), delta(S, "B")
XGAME = ExtendedGame((fearful_net(), realist_net()))
DELTAS = {AB, B}


def test_consistent_all_b():
    rep = check_profile(XGAME, [
        fearful_profile(B, alpha_accurate_cpd(1, S)),
        realist_profile(B, B),
    ])
    assert rep.consistent and rep.discrepancy == 0 and rep.witness is None
    for j in rep.joints:
        assert j[{"g": "B", "y": "B"}] == 1


def test_inconsistent_uniform():
    rep = check_profile(XGAME, [
        fearful_profile(uniform(S), alpha_accurate_cpd(1, S)),
        realist_profile(uniform(S), uniform(S)),
    ])
    fearful, realist = rep.joints
    assert fearful.table == (F(1, 2), 0, 0, F(1, 2))
    assert realist.table == (F(1, 4),) * 4
    assert not rep.consistent
    assert rep.discrepancy == F(1, 4)
    assert rep.witness == {"g": "AB", "y": "AB"}
    assert rep.witness_difference == F(1, 4)


def test_self_comparison():
    net = fearful_net()
    prof = fearful_profile(make_dist(S, [F(1, 3), F(2, 3)]), alpha_accurate_cpd(F(3, 4), S))
    rep = check_profile(ExtendedGame((net, net)), [prof, prof])
    assert rep.consistent and rep.discrepancy == 0


def test_symmetric_in_net_order():
    pf = fearful_profile(make_dist(S, [F(1, 5), F(4, 5)]), alpha_accurate_cpd(F(2, 3), S))
    pr = realist_profile(make_dist(S, [F(1, 3), F(2, 3)]), make_dist(S, [F(1, 7), F(6, 7)]))
    a = check_profile(XGAME, [pf, pr])
    b = check_profile(ExtendedGame((realist_net(), fearful_net())), [pr, pf])
    assert (a.consistent, a.discrepancy, a.witness) == (b.consistent, b.discrepancy, b.witness)
    assert a.witness_difference == -b.witness_difference


def test_variable_mismatch():
    other = BayesNet((NetNode("g", S), NetNode("z", S, ("g",))))
    with pytest.raises(VariableMismatch):
        ExtendedGame((fearful_net(), other))
    with pytest.raises(VariableMismatch):
        check_profile(XGAME, [{}])


def test_table_param_joint_matches_chain_rule():
    for alpha, z in [(F(3, 4), F(1, 2)), (F(1), F(1, 3)), (F(0), F(2, 5))]:
        t2 = Table2Param(alpha, z, 1 - z).joint()
        j = joint_from_net(fearful_net(), fearful_profile(make_dist(S, [z, 1 - z]), alpha_accurate_cpd(alpha, S)))
        assert t2.table == j.canonical().table


def test_table_param_normalization():
    with pytest.raises(OutOfRange):
        Table2Param(F(1), F(1, 2), F(1, 3))


@pytest.mark.parametrize("alpha", [F(1), F(3, 4), F(3, 5), F(9, 10)])
def test_feasible_two_deltas(alpha):
    fs = feasible_g_independent(alpha)
    assert fs.kind == "finite" and set(fs.members) == DELTAS
    assert not fs.derived


def test_feasible_half_is_all():
    fs = feasible_g_independent(F(1, 2))
    assert fs.kind == "all"
    assert fs.derived


def test_feasible_below_half_is_derived_extension():
    fs = feasible_g_independent(F(1, 4))
    assert set(fs.members) == DELTAS and fs.derived


def test_feasible_out_of_range():
    with pytest.raises(OutOfRange):
        feasible_g_independent(F(3, 2))
    with pytest.raises(OutOfRange):
        feasible_g_independent_oracle(F(1, 2), 1)


def test_oracle_examples():
    assert set(feasible_g_independent_oracle(F(9, 10), 1000).members) == DELTAS
    half = feasible_g_independent_oracle(F(1, 2), 10)
    assert len(half.members) == 11
    three = feasible_g_independent_oracle(F(1), 2)
    assert set(three.members) == DELTAS


def test_oracle_z_half_rows_differ_at_alpha_one():
    # Hand check: alpha = 1, z = 1/2 -> P(y|g=AB) = delta_AB, P(y|g=B) = delta_B.
    j = Table2Param(F(1), F(1, 2), F(1, 2)).joint()
    from newcombnet.netgame import extract_conditional

    pyg = extract_conditional(j, target="y", given="g")
    assert pyg.row("AB") == AB and pyg.row("B") == B


def test_general_cpd_lemma():
    identical = Cpd(S, S, (make_dist(S, [F(1, 3), F(2, 3)]),) * 2)
    assert feasible_g_independent(w_cpd=identical).kind == "all"
    skew = Cpd(S, S, (make_dist(S, [F(1, 3), F(2, 3)]), make_dist(S, [F(1, 2), F(1, 2)])))
    fs = feasible_g_independent(w_cpd=skew)
    assert set(fs.members) == DELTAS and fs.derived


def _oracle_general(w, grid):
    # Independent sweep for a general CPD: enumerate h and test rows directly.
    keep = set()
    for k in range(grid + 1):
        h = make_dist(S, [F(k, grid), 1 - F(k, grid)])
        rows = []
        for g in S:
            pg = sum(w.row(y)[g] * h[y] for y in S)
            if pg:
                rows.append(tuple(w.row(y)[g] * h[y] / pg for y in S))
        if len(set(rows)) == 1:
            keep.add(h)
    return keep


def test_general_cpd_lemma_against_sweep():
    vals = [F(0), F(1, 4), F(1, 2), F(2, 3), F(1)]
    for a, b in itertools.product(vals, repeat=2):
        w = Cpd(S, S, (make_dist(S, [a, 1 - a]), make_dist(S, [b, 1 - b])))
        analytic = feasible_g_independent(w_cpd=w).restrict_to_grid(S, 20)
        assert set(analytic.members) == _oracle_general(w, 20)


def test_independence_cross_terms():
    lhs, rhs = independence_cross_terms(F(3, 4), F(1, 3), F(2, 3))
    assert lhs == F(9, 16) * F(2, 9) and rhs == F(1, 16) * F(2, 9)
    assert lhs != rhs
    assert independence_cross_terms(F(1, 2), F(1, 3), F(2, 3))[0] == independence_cross_terms(F(1, 2), F(1, 3), F(2, 3))[1]


def test_induced_prediction_marginal():
    perfect = alpha_accurate_cpd(1, S)
    assert induced_prediction_marginal(AB, perfect) == AB
    assert induced_prediction_marginal(B, perfect) == B
    res = induced_prediction_marginal(uniform(S), perfect)
    assert isinstance(res, NoSolution)


def test_induced_prediction_marginal_no_pg_matches_exhaustively():
    # Brute force: no P(g) on a fine grid makes h(y)P(g) diagonal when h is uniform.
    h = uniform(S)
    fearful = joint_from_net(fearful_net(), fearful_profile(h, alpha_accurate_cpd(1, S))).canonical()
    for k in range(201):
        pg = make_dist(S, [F(k, 200), 1 - F(k, 200)])
        realist = joint_from_net(realist_net(), realist_profile(pg, h)).canonical()
        assert realist.table != fearful.table


def test_accuracy_violation_examples():
    h = make_dist(S, [F(3, 4), F(1, 4)])
    chk = accuracy_violation_witness(h, uniform(S))
    assert chk.p_g_given_y.rows == (uniform(S), uniform(S))
    assert not chk.matches_perfect_predictor

    chk = accuracy_violation_witness(h, AB)
    assert chk.p_g_given_y.row("AB") == AB and chk.p_g_given_y.row("B") == AB
    assert not chk.matches_perfect_predictor

    chk = accuracy_violation_witness(B, B)
    assert chk.p_g_given_y.row("AB") is None
    assert chk.p_g_given_y.row("B") == B
    assert chk.matches_perfect_predictor


def test_feasible_set_json():
    assert FeasibleSet.all().to_json() == {"kind": "all", "derived": False}
    doc = feasible_g_independent(1).to_json()
    assert doc["kind"] == "finite"
    assert [m["mass"] for m in doc["members"]] == [["1/1", "0/1"], ["0/1", "1/1"]]


def test_nonstandard_labels():
    s = OutcomeSpace(["one", "two"])
    fs = feasible_g_independent(F(3, 4), space=s)
    assert set(fs.members) == {delta(s, "one"), delta(s, "two")}
    assert fs.same_members(feasible_g_independent_oracle(F(3, 4), 50, space=s))
