"""
Tests for F1 scoring, reports and evaluation helpers
"""

import pytest

from constants import Assignment, DecisionPath, Method
from evaluation import (
    compare,
    evaluate,
    f1_overall,
    f1_pair,
    modularity_trace,
    separation_report,
    split_pairs,
    weight_sweep_curve,
)
from models import EvalReport, EvalRow, GroundTruth, GroupResult, SeparationStats

SIX = ["U1", "U2", "U3", "U4", "U5", "U6"]
GROUPS = [["U1", "U2", "U3"], ["U4", "U5", "U6"]]


def _truth(groups) -> GroundTruth:
    return GroundTruth(scenario="T", window=(0.0, 60.0), groups=groups)


class TestF1:
    def test_exact_match(self):
        truth = [{"a", "b", "c"}, {"d", "e"}]
        assert f1_overall(truth, [{"a", "b", "c"}, {"d", "e"}]) == 1.0

    def test_one_missing_member(self):
        assert f1_pair({"a", "b", "c"}, {"a", "b"}) == pytest.approx(0.8)

    def test_disjoint(self):
        assert f1_pair({"a", "b"}, {"c", "d"}) == 0.0

    def test_empty_detected_group(self):
        assert f1_pair({"a", "b"}, set()) == 0.0

    def test_group_split_in_two(self):
        assert f1_overall([{"a", "b", "c", "d"}], [{"a", "b"}, {"c", "d"}]) == pytest.approx(2.0 / 3.0)

    def test_stray_singleton_lowers_the_score(self):
        assert f1_overall([{"a", "b", "c"}], [{"a", "b", "c"}, {"a"}]) == pytest.approx(0.75)

    def test_optimal_assignment_scores_unmatched_groups_zero(self):
        score = f1_overall([{"a", "b", "c"}], [{"a", "b", "c"}, {"a"}], Assignment.OPTIMAL)
        assert score == pytest.approx(0.5)

    def test_pair_score_is_symmetric(self):
        assert f1_pair({"a", "b", "c"}, {"b", "c", "d", "e"}) == f1_pair({"b", "c", "d", "e"}, {"a", "b", "c"})

    def test_nothing_detected(self):
        assert f1_overall([{"a", "b"}], []) == 0.0


class TestEvaluate:
    def test_singletons_are_scored(self):
        result = GroupResult(
            groups=[["U1", "U2", "U3"]],
            ungrouped=["U4", "U5", "U6"],
            decision_path=DecisionPath.AUDIO_ONLY,
            modularities={"audio-only": 0.4},
            deciding_stage="audio-only",
        )
        row = evaluate(result, _truth(GROUPS))
        assert row.f1 == pytest.approx((1.0 + 3 * 0.5) / 4)
        assert row.modularity == 0.4
        assert row.scenario == "T"
        assert row.method == "meetsense"

    def test_compare_on_handbuilt_features(self, make_inputs):
        inputs = make_inputs(SIX, GROUPS, acoustic=(0.8, 0.05))
        rows = compare(inputs, _truth(GROUPS), methods=[Method.MEETSENSE], scenario="blocks")
        assert len(rows) == 1
        assert rows[0].f1 == 1.0
        assert rows[0].decision_path == "audio-only"

    def test_weight_sweep_curve_is_ordered(self):
        result = GroupResult(weight_sweep=[(0.5, 0.2), (0.0, 0.1), (1.0, 0.3)])
        assert [w for w, _ in weight_sweep_curve(result)] == [0.0, 0.5, 1.0]

    def test_modularity_trace_covers_every_merge(self, make_inputs):
        inputs = make_inputs(SIX, GROUPS, acoustic=(0.8, 0.05))
        trace = modularity_trace(inputs)
        assert len(trace) == len(SIX) - 1
        assert trace[-1].n_communities == 1
        assert max(step.modularity for step in trace) > 0.3


class TestSeparation:
    def test_split_pairs(self):
        similarity = {("U1", "U2"): 0.9, ("U1", "U4"): 0.1, ("U2", "U4"): None, ("U4", "U5"): 0.7}
        same, cross = split_pairs(similarity, _truth(GROUPS))
        assert same == [0.9, 0.7]
        assert cross == [0.1]

    def test_subjects_outside_every_group_are_cross(self):
        same, cross = split_pairs({("U1", "U9"): 0.4, ("U8", "U9"): 0.5}, _truth(GROUPS))
        assert same == []
        assert cross == [0.4, 0.5]

    def test_quartiles_and_gap(self):
        stats = SeparationStats(method="meetsense", same=[1.0, 2.0, 3.0, 4.0, 5.0], cross=[0.0, 1.0])
        assert stats.same_quartiles() == (2.0, 3.0, 4.0)
        assert stats.gap() == pytest.approx(2.5)
        assert SeparationStats(method="x", same=[0.5]).gap() is None

    def test_report_per_method(self):
        similarities = {"next2me": {("U1", "U2"): 0.3}, "meetsense": {("U1", "U4"): 0.2}}
        report = separation_report(similarities, _truth(GROUPS))
        assert [s.method for s in report] == ["meetsense", "next2me"]
        assert report[0].cross == [0.2]


class TestReport:
    def test_aggregate_and_table(self):
        report = EvalReport(rows=[
            EvalRow(scenario="S2", method="meetsense", f1=1.0, modularity=0.4),
            EvalRow(scenario="S1", method="meetsense", f1=0.5, modularity=0.2),
            EvalRow(scenario="S1", method="next2me", f1=0.25, modularity=0.1),
        ])
        assert [(r.scenario, r.method) for r in report.sorted_rows()] == [
            ("S1", "meetsense"), ("S1", "next2me"), ("S2", "meetsense"),
        ]
        overall = {r.method: r for r in report.aggregate()}
        assert overall["meetsense"].f1 == pytest.approx(0.75)
        assert overall["meetsense"].modularity == pytest.approx(0.3)
        assert overall["next2me"].scenario == "overall"
        assert set(report.f1_table()) == {"S1", "S2"}
