import numpy as np
import pytest

from fclear.errors import BadObjective, EmptySet, MissingDesignation, NotAClearingVector
from fclear.objectives import (
    OBJECTIVES,
    ObjectiveValue,
    canonical_objective,
    centrality,
    distance,
    evaluate_objective,
    preference_counts,
)
from fclear.solver import enumerate_default_sets

R_A = np.array([1.0, 0.0, 1.0, 1.0])
R_B = np.array([1.0, 1.0, 0.0, 1.0])
R_MID = np.array([1.0, 3 / 7, 3 / 7, 1.0])


def test_names():
    assert canonical_objective("max-equity") == "MaxEquity"
    assert canonical_objective("min_prop_unpaid") == "MinPropUnpaid"
    assert len(OBJECTIVES) == 12
    with pytest.raises(BadObjective):
        canonical_objective("MaxHappiness")


def test_lossy_pair_values(lossy_pair):
    ev = lambda r, kind, **kw: evaluate_objective(lossy_pair, r, kind, **kw).value
    assert ev(R_A, "MinDefault") == 1
    assert ev(R_MID, "MinDefault") == 2
    assert ev(R_A, "MaxSurviving") == 3
    assert ev(R_A, "MaxEquity", node=0) == pytest.approx(1.5)
    assert ev(R_MID, "MinEquity", node=3) == pytest.approx(6 / 7)
    assert ev(R_A, "MinUnpaid") == pytest.approx(1.0)
    assert ev(R_MID, "MaxPaid") == pytest.approx(1.5 * 4 / 7 * 2 + 6 / 7)
    assert ev(R_A, "MinPropUnpaid") == pytest.approx(1.0 / 3.5)
    assert ev(R_A, "MaxPropPaid") == pytest.approx(2.5 / 3.5)
    assert ev(R_A, "MinDiffEq", pair=(0, 3)) == pytest.approx(0.5)
    assert ev(R_A, "AllianceBalance", partition=([0], [2, 3])) == pytest.approx(0.0)


def test_preferences(lossy_pair):
    sols = enumerate_default_sets(lossy_pair).solutions
    counts = preference_counts(lossy_pair, sols)
    # s and t are best off in both corner solutions; the mixed one is worst for all
    by = {tuple(np.round(r, 6)): c for r, c in zip(sols, counts)}
    assert by[tuple(np.round(R_MID, 6))] == (0, 4)
    assert evaluate_objective(lossy_pair, R_A, "MaxPrefer", solutions=sols).value == 3
    assert evaluate_objective(lossy_pair, R_MID, "MinLeastPrefer", solutions=sols).value == 4
    with pytest.raises(MissingDesignation):
        evaluate_objective(lossy_pair, R_A, "MaxPrefer")
    with pytest.raises(EmptySet):
        preference_counts(lossy_pair, [])


def test_missing_designations(lossy_pair):
    for kind in ("MaxEquity", "MinDiffEq", "AllianceBalance"):
        with pytest.raises(MissingDesignation):
            evaluate_objective(lossy_pair, R_A, kind)


def test_verification(lossy_pair):
    with pytest.raises(NotAClearingVector):
        evaluate_objective(lossy_pair, np.ones(4), "MinDefault")
    assert evaluate_objective(lossy_pair, np.ones(4), "MinDefault", verify=False).value == 0


def test_zero_liabilities_proportion():
    from fclear.model import build_system

    s = build_system([1.0, 0.0], ())
    assert evaluate_objective(s, [1.0, 1.0], "MinPropUnpaid").value == 0.0


def test_direction():
    a = ObjectiveValue("MaxPaid", 2.0, "maximize")
    b = ObjectiveValue("MaxPaid", 1.0, "maximize")
    assert a.better_than(b) and not b.better_than(a)
    c = ObjectiveValue("MinUnpaid", 1.0, "minimize")
    assert c.better_than(ObjectiveValue("MinUnpaid", 2.0, "minimize"))


def test_distance_and_centrality():
    S = [np.array([0.0, 1.0]), np.array([1.0, 0.0]), np.array([0.5, 0.5])]
    assert distance(S[0], S[1]) == 2.0
    np.testing.assert_allclose(centrality(S, "cent1"), [1.0, 1.0, 0.0])
    np.testing.assert_allclose(centrality(S, "cent2"), [3.0, 3.0, 2.0])
    with pytest.raises(BadObjective):
        centrality(S, "cent3")
    with pytest.raises(EmptySet):
        centrality([])
