import json

import numpy as np
import pytest

from lire import (
    AllRegionsInfeasibleError,
    CEQuery,
    CappedRegionSetError,
    DistanceMetric,
    IndexFormatError,
    NoLiveTargetRegionError,
    NoQualifyingRowError,
    QueryValidationError,
    TargetSet,
    TargetTaskMismatchError,
    apply_feature_constraints,
    build_index,
    dataset_search,
    deserialize_index,
    enumerate_nonempty_regions,
    exact_search,
    find_ce,
    leaf_tuple,
    predict,
    query_from_doc,
    query_to_doc,
    select_target_regions,
    serialize_index,
    verify_feasibility,
)
from lire.engine import METHOD_DATASET, METHOD_EXACT, METHOD_LIRE

from support import FIXTURES, random_forest_doc, forest_of

import oracles

L2 = DistanceMetric("l2sq")
L1 = DistanceMetric("l1")


# ---------------------------------------------------------------------------
# targets and query documents


def test_target_classes_sorted_deduped():
    t = TargetSet.for_classes([2, 0, 2])
    assert t.classes == (0, 2)
    assert t.contains_label(0) and not t.contains_label(1)


def test_target_classes_rejects_bad():
    with pytest.raises(QueryValidationError):
        TargetSet.for_classes([])
    with pytest.raises(QueryValidationError):
        TargetSet.for_classes([-1])


def test_target_intervals_merge_overlaps():
    t = TargetSet.for_intervals([[2.0, 3.0], [1.0, 2.5], [5.0, 6.0]])
    assert t.intervals == ((1.0, 3.0), (5.0, 6.0))
    assert t.contains_value(3.0) and not t.contains_value(4.0)


def test_target_intervals_rejects_bad():
    with pytest.raises(QueryValidationError):
        TargetSet.for_intervals([])
    with pytest.raises(QueryValidationError):
        TargetSet.for_intervals([[2.0, 1.0]])
    with pytest.raises(QueryValidationError):
        TargetSet.for_intervals([[0.0]])


def test_query_doc_round_trip():
    q = CEQuery(
        np.array([0.1, 0.2]),
        TargetSet.for_classes([1]),
        DistanceMetric("l1", np.array([1.0, 2.0])),
        fixed={1: 0.5},
        bounds={0: (0.0, 1.0)},
        margin=0.01,
        budget_regions=5,
        budget_millis=100,
    )
    doc = query_to_doc(q)
    back = query_from_doc(json.loads(json.dumps(doc)))
    assert query_to_doc(back) == doc
    assert back.fixed == {1: 0.5}
    assert back.bounds == {0: (0.0, 1.0)}
    assert back.budget_regions == 5 and back.budget_millis == 100


def test_query_doc_rejects_unknown_keys():
    with pytest.raises(QueryValidationError):
        query_from_doc({"source": [0.0], "target": {"classes": [1]}, "speed": 9})


def test_query_doc_rejects_both_target_kinds():
    with pytest.raises(QueryValidationError):
        query_from_doc(
            {"source": [0.0], "target": {"classes": [1], "intervals": [[0, 1]]}}
        )


def test_query_doc_rejects_bad_budget():
    with pytest.raises(QueryValidationError):
        query_from_doc(
            {"source": [0.0], "target": {"classes": [1]}, "budget": {"rows": 5}}
        )


def test_query_validation_errors(toy_forest, toy_index):
    target = TargetSet.for_classes([1])
    bad = [
        CEQuery(np.array([0.1]), target),
        CEQuery(np.array([0.1, np.nan]), target),
        CEQuery(np.array([0.1, 0.2]), target, margin=-0.5),
        CEQuery(np.array([0.1, 0.2]), target, fixed={7: 0.0}),
        CEQuery(np.array([0.1, 0.2]), target, bounds={0: (2.0, 1.0)}),
        CEQuery(np.array([0.1, 0.2]), target, fixed={0: 0.5}, bounds={0: (0.0, 1.0)}),
        CEQuery(np.array([0.1, 0.2]), target, budget_regions=0),
    ]
    for q in bad:
        with pytest.raises(QueryValidationError):
            find_ce(toy_forest, toy_index, q)


def test_target_task_mismatch(toy_forest, toy_index, toy_data):
    q = CEQuery(np.array([0.1, 0.2]), TargetSet.for_intervals([[0.0, 1.0]]))
    with pytest.raises(TargetTaskMismatchError):
        find_ce(toy_forest, toy_index, q)
    with pytest.raises(TargetTaskMismatchError):
        dataset_search(toy_forest, toy_data, q)
    with pytest.raises(TargetTaskMismatchError):
        exact_search(toy_forest, enumerate_nonempty_regions(toy_forest), q)


# ---------------------------------------------------------------------------
# index construction and serialization


@pytest.fixture(scope="module")
def toy_index(toy_forest, toy_data):
    return build_index(toy_forest, toy_data)


@pytest.fixture(scope="module")
def regress_index(regress_forest, regress_data):
    return build_index(regress_forest, regress_data)


TOY_INDEX_KEYS = [
    (0, 0, 0),
    (0, 1, 0),
    (0, 2, 0),
    (2, 1, 0),
    (1, 3, 0),
    (2, 1, 2),
    (2, 3, 0),
    (2, 3, 3),
    (3, 3, 1),
    (3, 3, 3),
]

TOY_INDEX_WITNESSES = [[0, 1], [3, 4], [2], [6], [5], [9], [7], [10], [8], [11]]


def test_build_index_toy_layout(toy_index):
    assert toy_index.M == 10
    assert toy_index.T == 3 and toy_index.D == 2 and toy_index.K == 2
    assert [tuple(int(v) for v in k) for k in toy_index.keys] == TOY_INDEX_KEYS
    assert toy_index.witnesses == TOY_INDEX_WITNESSES
    np.testing.assert_array_equal(toy_index.offsets, [0, 4, 10])
    assert toy_index.axis_aligned
    assert toy_index.group_sizes() == {0: 4, 1: 6}


def test_build_index_regression_sorted(regress_index):
    vals = regress_index.outputs[:, 0]
    np.testing.assert_allclose(vals, [1.75, 2.25, 3.25, 3.75])
    assert [tuple(int(v) for v in k) for k in regress_index.keys] == [
        (0, 0),
        (1, 0),
        (0, 1),
        (1, 1),
    ]
    assert regress_index.offsets is None


def test_index_round_trip_bytes(toy_forest, toy_index):
    text = serialize_index(toy_index)
    back = deserialize_index(text, toy_forest)
    assert serialize_index(back) == text


def test_index_rebuild_identical(toy_forest, toy_data):
    a = serialize_index(build_index(toy_forest, toy_data))
    b = serialize_index(build_index(toy_forest, toy_data))
    assert a == b


def test_index_golden_file(toy_index):
    golden = (FIXTURES / "toy_golden_index.json").read_text()
    assert serialize_index(toy_index) == golden


def test_deserialize_rejects_corruption(toy_forest, toy_index):
    text = serialize_index(toy_index)

    def mutate(fn):
        doc = json.loads(text)
        fn(doc)
        with pytest.raises(IndexFormatError):
            deserialize_index(json.dumps(doc), toy_forest)

    mutate(lambda d: d.update(version=2))
    mutate(lambda d: d.update(M=9))
    mutate(lambda d: d.update(extra=1))
    mutate(lambda d: d.pop("witnesses"))
    mutate(lambda d: d["groups"].update(offsets=[0, 5, 10]))
    mutate(lambda d: d["witnesses"][0].reverse())
    mutate(lambda d: d["keys"].reverse())
    mutate(lambda d: d.update(task="regression"))
    mutate(lambda d: d.pop("boxes"))

    # oblique-style index must not carry boxes for this axis forest check
    doc = json.loads(text)
    doc["keys"][0] = [9, 9, 9]
    with pytest.raises(IndexFormatError):
        deserialize_index(json.dumps(doc), toy_forest)


def test_deserialize_without_forest_is_lenient_on_model(toy_index):
    text = serialize_index(toy_index)
    back = deserialize_index(text)
    assert back.M == toy_index.M


def test_stump_index_two_groups(stump_forest, stump_data):
    idx = build_index(stump_forest, stump_data)
    assert idx.M == 2
    assert idx.group_sizes() == {0: 1, 1: 1}


# ---------------------------------------------------------------------------
# select_target_regions


def test_select_classification_single(toy_index):
    assert select_target_regions(toy_index, TargetSet.for_classes([1])) == [(4, 10)]
    assert select_target_regions(toy_index, TargetSet.for_classes([0])) == [(0, 4)]


def test_select_classification_merges_adjacent(toy_index):
    assert select_target_regions(toy_index, TargetSet.for_classes([0, 1])) == [(0, 10)]


def test_select_classification_unknown_label(toy_index):
    assert select_target_regions(toy_index, TargetSet.for_classes([7])) == []


def test_select_regression_interval(regress_index):
    # outputs 1.75, 2.25, 3.25, 3.75
    assert select_target_regions(regress_index, TargetSet.for_intervals([[2.0, 3.3]])) == [(1, 3)]
    assert select_target_regions(
        regress_index, TargetSet.for_intervals([[1.7, 1.8], [3.0, 4.0]])
    ) == [(0, 1), (2, 4)]
    assert select_target_regions(regress_index, TargetSet.for_intervals([[9.0, 10.0]])) == []


def test_select_matches_naive_filter_random():
    rng = np.random.default_rng(53)
    for _ in range(40):
        task = rng.choice(["classification", "regression"])
        doc = random_forest_doc(
            rng, T=int(rng.integers(1, 4)), D=2, depth=2, task=task, K=3, lattice=0.1
        )
        forest = forest_of(doc)
        X = rng.uniform(0, 1, size=(30, 2))
        idx = build_index(forest, X)
        if task == "classification":
            labels = sorted({int(v) for v in rng.integers(0, 3, size=2)})
            target = TargetSet.for_classes(labels)
            tdoc = {"classes": labels}
        else:
            a, b = np.sort(rng.uniform(-2, 2, size=2))
            target = TargetSet.for_intervals([[a, b]])
            tdoc = {"intervals": [(a, b)]}
        got = sorted(
            i for s, e in select_target_regions(idx, target) for i in range(s, e)
        )
        assert got == oracles.naive_target_rows(task, idx.outputs, tdoc)


# ---------------------------------------------------------------------------
# apply_feature_constraints


def test_constraints_fix_inside():
    lower = np.array([[0.0, 0.0]])
    upper = np.array([[1.0, 1.0]])
    lo, hi, valid = apply_feature_constraints(lower, upper, {1: 0.5}, {})
    assert valid.all()
    np.testing.assert_allclose(lo, [[0.0, 0.5]])
    np.testing.assert_allclose(hi, [[1.0, 0.5]])


def test_constraints_fix_on_open_face_invalid():
    lower = np.array([[0.0, 0.0]])
    upper = np.array([[1.0, 1.0]])
    _, _, valid = apply_feature_constraints(lower, upper, {1: 1.0}, {})
    assert not valid.any()


def test_constraints_fix_on_closed_face_valid():
    lower = np.array([[0.0, 0.0]])
    upper = np.array([[1.0, 1.0]])
    _, _, valid = apply_feature_constraints(lower, upper, {1: 0.0}, {})
    assert valid.all()


def test_constraints_disjoint_bounds_invalid():
    lower = np.array([[0.0, 0.0]])
    upper = np.array([[1.0, 1.0]])
    _, _, valid = apply_feature_constraints(lower, upper, {}, {0: (2.0, 3.0)})
    assert not valid.any()


def test_constraints_vectorized_mixed():
    lower = np.array([[0.0, 0.0], [0.5, 0.0], [2.0, 0.0]])
    upper = np.array([[1.0, 1.0], [2.0, 1.0], [3.0, 1.0]])
    lo, hi, valid = apply_feature_constraints(lower, upper, {}, {0: (0.8, 2.0)})
    assert valid.tolist() == [True, True, True]
    np.testing.assert_allclose(lo[:, 0], [0.8, 0.8, 2.0])
    np.testing.assert_allclose(hi[:, 0], [1.0, 2.0, 2.0])
    # region 3 pinched to x0 == 2.0, its closed lower corner: still valid
    _, _, valid2 = apply_feature_constraints(lower, upper, {}, {0: (1.9, 2.0)})
    assert valid2.tolist() == [False, True, True]


# ---------------------------------------------------------------------------
# find_ce on the axis fixtures


def test_find_ce_toy_worked_example(toy_forest, toy_index):
    q = CEQuery(np.array([0.2, 0.1]), TargetSet.for_classes([1]))
    res = find_ce(toy_forest, toy_index, q)
    assert res.region == (1, 3, 0)
    np.testing.assert_allclose(res.x, [0.3, 0.5])
    assert res.distance == pytest.approx(0.17, abs=1e-12)
    assert res.witness == 5
    assert res.feasible and not res.anytime
    assert res.scanned == 6
    assert res.method == METHOD_LIRE
    assert predict(toy_forest, res.x).label == 1


def test_find_ce_toy_l1(toy_forest, toy_index):
    q = CEQuery(np.array([0.2, 0.1]), TargetSet.for_classes([1]), L1)
    res = find_ce(toy_forest, toy_index, q)
    # (1,3,0) and (2,1,2) both cost 0.5; float rounding picks one of them
    assert res.region in {(1, 3, 0), (2, 1, 2)}
    assert res.distance == pytest.approx(0.5, abs=1e-12)
    assert res.feasible


def test_find_ce_source_already_in_target(toy_forest, toy_index):
    q = CEQuery(np.array([0.1, 0.1]), TargetSet.for_classes([0]))
    res = find_ce(toy_forest, toy_index, q)
    assert res.distance == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_allclose(res.x, [0.1, 0.1])
    assert res.region == (0, 0, 0)
    assert res.feasible


def test_find_ce_stump_margin(stump_forest, stump_data):
    idx = build_index(stump_forest, stump_data)
    base = CEQuery(np.array([0.2]), TargetSet.for_classes([1]))
    res = find_ce(stump_forest, idx, base)
    assert res.distance == pytest.approx(0.09, abs=1e-12)
    np.testing.assert_allclose(res.x, [0.5])
    assert res.witness == 1

    nudged = find_ce(
        stump_forest, idx, CEQuery(np.array([0.2]), TargetSet.for_classes([1]), margin=0.01)
    )
    np.testing.assert_allclose(nudged.x, [0.51])
    assert nudged.distance == pytest.approx(0.0961, abs=1e-12)
    assert nudged.feasible


def test_find_ce_fixed_feature(toy_forest, toy_index):
    q = CEQuery(np.array([0.2, 0.1]), TargetSet.for_classes([1]), fixed={1: 0.1})
    res = find_ce(toy_forest, toy_index, q)
    assert res.region == (2, 1, 2)
    np.testing.assert_allclose(res.x, [0.7, 0.1])
    assert res.distance == pytest.approx(0.25, abs=1e-12)
    assert res.x[1] == 0.1
    assert predict(toy_forest, res.x).label == 1


def test_find_ce_bounds(toy_forest, toy_index):
    q = CEQuery(
        np.array([0.2, 0.1]), TargetSet.for_classes([1]), bounds={1: (0.0, 0.3)}
    )
    res = find_ce(toy_forest, toy_index, q)
    assert res.region == (2, 1, 2)
    np.testing.assert_allclose(res.x, [0.7, 0.1])
    assert res.distance == pytest.approx(0.25, abs=1e-12)


def test_find_ce_constraints_eliminate_all(toy_forest, toy_index):
    q = CEQuery(np.array([0.2, 0.1]), TargetSet.for_classes([1]), fixed={0: 0.2})
    with pytest.raises(AllRegionsInfeasibleError):
        find_ce(toy_forest, toy_index, q)


def test_find_ce_no_live_target(toy_forest, toy_index):
    q = CEQuery(np.array([0.2, 0.1]), TargetSet.for_classes([5]))
    with pytest.raises(NoLiveTargetRegionError):
        find_ce(toy_forest, toy_index, q)


def test_find_ce_budget_regions(toy_forest, toy_index):
    q = CEQuery(
        np.array([0.2, 0.1]), TargetSet.for_classes([1]), budget_regions=1
    )
    res = find_ce(toy_forest, toy_index, q)
    assert res.anytime
    assert res.scanned == 1
    assert res.feasible
    full = find_ce(
        toy_forest,
        toy_index,
        CEQuery(np.array([0.2, 0.1]), TargetSet.for_classes([1]), budget_regions=6),
    )
    assert not full.anytime
    assert full.distance == pytest.approx(0.17, abs=1e-12)


def test_find_ce_boundary_source_double_face(toy_forest, toy_index):
    # source exactly on two thresholds; the winning region's closest point
    # sits on open faces and must be nudged inside
    q = CEQuery(np.array([0.5, 0.4]), TargetSet.for_classes([0]))
    res = find_ce(toy_forest, toy_index, q)
    assert res.region == (0, 1, 0)
    assert res.feasible
    assert res.distance <= 1e-12
    assert predict(toy_forest, res.x).label == 0
    assert leaf_tuple(toy_forest, res.x) == (0, 1, 0)


def test_find_ce_weighted_metric(toy_forest, toy_index):
    # heavy weight on x0 makes (2,3,0) (move x1 only after x0 is cheap) win
    w = np.array([100.0, 1.0])
    q = CEQuery(np.array([0.2, 0.1]), TargetSet.for_classes([1]), DistanceMetric("l2sq", w))
    res = find_ce(toy_forest, toy_index, q)
    d_by_hand = {
        (1, 3, 0): 100 * 0.01 + 0.16,
        (2, 1, 2): 100 * 0.25,
        (2, 3, 0): 100 * 0.09 + 0.09,
        (2, 3, 3): 100 * 0.25 + 0.09,
        (3, 3, 1): 100 * 0.09 + 0.25,
        (3, 3, 3): 100 * 0.25 + 0.16,
    }
    best = min(d_by_hand, key=d_by_hand.get)
    assert res.region == best
    assert res.distance == pytest.approx(d_by_hand[best], abs=1e-9)


# ---------------------------------------------------------------------------
# find_ce on oblique and regression fixtures


def test_find_ce_oblique_tie(oblique_forest, oblique_data):
    idx = build_index(oblique_forest, oblique_data)
    q = CEQuery(np.array([0.2, 0.2]), TargetSet.for_classes([1]))
    res = find_ce(oblique_forest, idx, q)
    assert res.region == (1, 0)
    assert res.distance == pytest.approx(0.18, abs=1e-6)
    assert res.feasible
    assert leaf_tuple(oblique_forest, res.x) == (1, 0)
    assert predict(oblique_forest, res.x).label == 1


def test_find_ce_oblique_l1(oblique_forest, oblique_data):
    idx = build_index(oblique_forest, oblique_data)
    q = CEQuery(np.array([0.2, 0.2]), TargetSet.for_classes([1]), L1)
    res = find_ce(oblique_forest, idx, q)
    assert res.region == (1, 0)
    assert res.distance == pytest.approx(0.6, abs=1e-6)
    assert res.feasible


def test_find_ce_oblique_fixed(oblique_forest, oblique_data):
    idx = build_index(oblique_forest, oblique_data)
    q = CEQuery(np.array([0.2, 0.2]), TargetSet.for_classes([1]), fixed={0: 0.2})
    res = find_ce(oblique_forest, idx, q)
    # x0 pinned at 0.2: only x1 can move, the diagonal needs x1 >= 0.8
    assert res.region == (1, 0)
    assert res.x[0] == pytest.approx(0.2, abs=1e-9)
    assert res.distance == pytest.approx(0.36, abs=1e-6)
    assert res.feasible


def test_find_ce_regression_interval(regress_forest, regress_index):
    q = CEQuery(np.array([0.2, 0.2]), TargetSet.for_intervals([[3.0, 4.0]]))
    res = find_ce(regress_forest, regress_index, q)
    assert res.region == (0, 1)
    np.testing.assert_allclose(res.x, [0.2, 0.5])
    assert res.distance == pytest.approx(0.09, abs=1e-12)
    assert res.witness == 3
    assert 3.0 <= predict(regress_forest, res.x).value <= 4.0


def test_find_ce_regression_source_in_target(regress_forest, regress_index):
    q = CEQuery(np.array([0.2, 0.2]), TargetSet.for_intervals([[1.0, 2.0]]))
    res = find_ce(regress_forest, regress_index, q)
    assert res.distance == pytest.approx(0.0, abs=1e-15)


# ---------------------------------------------------------------------------
# verify_feasibility


def test_verify_interior_point_unchanged(toy_forest):
    x = np.array([0.35, 0.55])
    ok, pt = verify_feasibility(
        toy_forest, x, (1, 3, 0), TargetSet.for_classes([1]), np.array([0.4, 0.55])
    )
    assert ok
    np.testing.assert_array_equal(pt, x)


def test_verify_boundary_point_nudged(toy_forest):
    # x sits exactly on the open face x0 < 0.5 of region (1,3,0)
    x = np.array([0.5, 0.55])
    anchor = np.array([0.4, 0.55])
    ok, pt = verify_feasibility(
        toy_forest, x, (1, 3, 0), TargetSet.for_classes([1]), anchor
    )
    assert ok
    assert leaf_tuple(toy_forest, pt) == (1, 3, 0)
    assert pt[0] < 0.5


def test_verify_wrong_region_falls_back_to_anchor(toy_forest):
    x = np.array([0.9, 0.9])
    anchor = np.array([0.4, 0.55])
    ok, pt = verify_feasibility(
        toy_forest, x, (1, 3, 0), TargetSet.for_classes([1]), anchor
    )
    assert ok
    np.testing.assert_allclose(pt, anchor)


# ---------------------------------------------------------------------------
# dataset_search


def test_dataset_search_stump(stump_forest, stump_data):
    q = CEQuery(np.array([0.2]), TargetSet.for_classes([1]))
    res = dataset_search(stump_forest, stump_data, q)
    np.testing.assert_allclose(res.x, [0.8])
    assert res.distance == pytest.approx(0.36, abs=1e-12)
    assert res.witness == 1
    assert res.method == METHOD_DATASET
    assert res.feasible and not res.anytime


def test_dataset_search_toy(toy_forest, toy_data):
    q = CEQuery(np.array([0.2, 0.1]), TargetSet.for_classes([1]))
    res = dataset_search(toy_forest, toy_data, q)
    assert res.witness == 7
    np.testing.assert_allclose(res.x, [0.55, 0.45])
    assert res.distance == pytest.approx(0.245, abs=1e-12)
    assert res.scanned == 6


def test_dataset_search_source_is_target_row(toy_forest, toy_data):
    q = CEQuery(np.array([0.55, 0.45]), TargetSet.for_classes([1]))
    res = dataset_search(toy_forest, toy_data, q)
    assert res.distance == 0.0
    assert res.witness == 7


def test_dataset_search_fixed_exact_match(toy_forest, toy_data):
    q = CEQuery(np.array([0.2, 0.1]), TargetSet.for_classes([1]), fixed={1: 0.45})
    res = dataset_search(toy_forest, toy_data, q)
    # only rows with x1 == 0.45 qualify: rows 7 and 10
    assert res.witness == 7
    q2 = CEQuery(np.array([0.2, 0.1]), TargetSet.for_classes([1]), fixed={1: 0.44})
    with pytest.raises(NoQualifyingRowError):
        dataset_search(toy_forest, toy_data, q2)


def test_dataset_search_bounds(toy_forest, toy_data):
    q = CEQuery(
        np.array([0.2, 0.1]), TargetSet.for_classes([1]), bounds={1: (0.0, 0.2)}
    )
    res = dataset_search(toy_forest, toy_data, q)
    assert res.witness == 9
    assert res.scanned == 1


def test_dataset_search_no_row(toy_forest, toy_data):
    with pytest.raises(NoQualifyingRowError):
        dataset_search(
            toy_forest, toy_data, CEQuery(np.array([0.2, 0.1]), TargetSet.for_classes([5]))
        )


# ---------------------------------------------------------------------------
# exact_search


def test_exact_search_gap_chain(gap_forest, gap_data):
    q = CEQuery(np.array([0.0]), TargetSet.for_classes([1]))
    nonempty = enumerate_nonempty_regions(gap_forest)
    idx = build_index(gap_forest, gap_data)
    d_exact = exact_search(gap_forest, nonempty, q)
    d_lire = find_ce(gap_forest, idx, q)
    d_data = dataset_search(gap_forest, gap_data, q)
    assert d_exact.distance == pytest.approx(1.0, abs=1e-12)
    assert d_lire.distance == pytest.approx(4.0, abs=1e-12)
    assert d_data.distance == pytest.approx(9.0, abs=1e-12)
    assert d_exact.region == (1, 0)
    assert d_exact.witness == -1
    assert d_exact.method == METHOD_EXACT
    assert d_exact.feasible and d_lire.feasible


def test_exact_search_refuses_capped(toy_forest):
    rs = enumerate_nonempty_regions(toy_forest, cap=10)
    q = CEQuery(np.array([0.2, 0.1]), TargetSet.for_classes([1]))
    with pytest.raises(CappedRegionSetError):
        exact_search(toy_forest, rs, q)


def test_exact_search_no_target_region(toy_forest):
    rs = enumerate_nonempty_regions(toy_forest)
    q = CEQuery(np.array([0.2, 0.1]), TargetSet.for_classes([5]))
    with pytest.raises(NoLiveTargetRegionError):
        exact_search(toy_forest, rs, q)


def test_exact_equals_lire_single_tree_all_live(toy_doc):
    doc = dict(toy_doc, trees=[toy_doc["trees"][0]])
    forest = forest_of(doc)
    X = np.array([[0.2, 0.2], [0.2, 0.8], [0.8, 0.2], [0.8, 0.8]])
    idx = build_index(forest, X)
    rs = enumerate_nonempty_regions(forest)
    for src, cls in [((0.1, 0.1), 1), ((0.9, 0.9), 0), ((0.45, 0.55), 1)]:
        q = CEQuery(np.array(src), TargetSet.for_classes([cls]))
        a = exact_search(forest, rs, q)
        b = find_ce(forest, idx, q)
        assert a.distance == pytest.approx(b.distance, abs=1e-12)
        assert a.region == b.region


def test_exact_matches_brute_oracle_random():
    rng = np.random.default_rng(61)
    checked = 0
    for _ in range(25):
        doc = random_forest_doc(
            rng,
            T=int(rng.integers(1, 5)),
            D=int(rng.integers(2, 4)),
            depth=3,
            task="classification",
            lattice=0.05,
        )
        forest = forest_of(doc)
        rs = enumerate_nonempty_regions(forest)
        labels = np.argmax(rs.outputs, axis=1)
        for cls in range(2):
            if not (labels == cls).any():
                continue
            src = rng.uniform(0, 1, doc["D"])
            for metric in (L2, L1):
                q = CEQuery(src, TargetSet.for_classes([cls]), metric)
                res = exact_search(forest, rs, q)
                keys = [tuple(int(v) for v in k) for k in rs.keys]
                best, _ = oracles.brute_force_ce_axis(
                    doc, keys, src, lambda vec: int(np.argmax(vec)) == cls, metric.kind
                )
                assert res.feasible
                assert best - 1e-9 <= res.distance <= best + 1e-6
                checked += 1
    assert checked >= 40


def test_toy_dominance_twenty_queries(toy_forest, toy_data, toy_index):
    rng = np.random.default_rng(67)
    nonempty = enumerate_nonempty_regions(toy_forest)
    for _ in range(20):
        src = rng.uniform(0, 1, 2)
        cls = int(rng.integers(0, 2))
        metric = L2 if rng.random() < 0.5 else L1
        q = CEQuery(src, TargetSet.for_classes([cls]), metric)
        d_exact = exact_search(toy_forest, nonempty, q).distance
        d_lire = find_ce(toy_forest, toy_index, q).distance
        d_data = dataset_search(toy_forest, toy_data, q).distance
        assert d_exact <= d_lire + 1e-9
        assert d_lire <= d_data + 1e-9


# ---------------------------------------------------------------------------
# anytime behavior


def test_budget_full_equals_unbudgeted(toy_forest, toy_index):
    q0 = CEQuery(np.array([0.2, 0.1]), TargetSet.for_classes([1]))
    qb = CEQuery(np.array([0.2, 0.1]), TargetSet.for_classes([1]), budget_regions=6)
    a = find_ce(toy_forest, toy_index, q0)
    b = find_ce(toy_forest, toy_index, qb)
    assert a.to_doc() == b.to_doc()


def test_nested_budgets_monotone(toy_forest, toy_index):
    rng = np.random.default_rng(71)
    for _ in range(25):
        src = rng.uniform(0, 1, 2)
        cls = int(rng.integers(0, 2))
        m_target = {0: 4, 1: 6}[cls]
        b1 = int(rng.integers(1, m_target))
        b2 = int(rng.integers(b1 + 1, m_target + 1))
        mk = lambda b: find_ce(
            toy_forest,
            toy_index,
            CEQuery(src, TargetSet.for_classes([cls]), budget_regions=b),
        ).distance
        assert mk(b2) <= mk(b1) + 1e-12


def test_budget_millis_anytime_flag(toy_forest, toy_index):
    q = CEQuery(
        np.array([0.2, 0.1]), TargetSet.for_classes([1]), budget_millis=10000
    )
    res = find_ce(toy_forest, toy_index, q)
    assert not res.anytime
    assert res.distance == pytest.approx(0.17, abs=1e-12)


# ---------------------------------------------------------------------------
# result documents


def test_result_to_doc_shape(toy_forest, toy_index):
    res = find_ce(
        toy_forest, toy_index, CEQuery(np.array([0.2, 0.1]), TargetSet.for_classes([1]))
    )
    doc = res.to_doc()
    assert set(doc) == {
        "x",
        "distance",
        "region",
        "witness",
        "feasible",
        "scanned",
        "anytime",
        "method",
    }
    assert doc["region"] == [1, 3, 0]
    assert json.dumps(doc)
