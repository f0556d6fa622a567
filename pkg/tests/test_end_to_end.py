"""
End-to-end runs of the library scenarios through the full pipeline

These render minutes of audio per scenario; select them with `-m slow`.
"""

import time
from statistics import median

import pytest

from baselines import baseline_detect
from constants import DecisionPath, Method
from detector import detect, extract_features
from evaluation import benchmark, compare, f1_overall, noise_sweep, run_method, split_pairs
from models import PipelineConfig
from sim import (
    ground_truth,
    library_scenario,
    scans_by_subject,
    scenario_library,
    synth_audio,
    synth_scans,
    with_snr,
)

pytestmark = pytest.mark.slow


def _run(scenario):
    scans = scans_by_subject(synth_scans(scenario)) if scenario.access_points else None
    return synth_audio(scenario), scans


@pytest.mark.parametrize("name", ["S1", "S2", "S5"])
def test_clean_groups_recovered(name):
    scenario = library_scenario(name)
    traces, scans = _run(scenario)
    result = detect(traces, scans)
    truth = ground_truth(scenario)
    assert f1_overall(truth.as_sets(), result.detected_sets()) == 1.0
    assert result.accepting_modularity() >= 0.15


@pytest.mark.parametrize("name", sorted(scenario_library()))
def test_detection_finishes_within_a_minute(name):
    traces, scans = _run(library_scenario(name))
    started = time.perf_counter()
    detect(traces, scans)
    assert time.perf_counter() - started <= 60.0


def test_presentation_is_one_group():
    scenario = library_scenario("S4")
    traces, scans = _run(scenario)
    result = detect(traces, scans)
    assert result.groups == [[f"U{k}" for k in range(1, 8)]]
    assert result.accepting_modularity() == pytest.approx(0.0, abs=0.05)


def test_same_group_pairs_sound_alike():
    scenario = library_scenario("S1")
    traces, scans = _run(scenario)
    inputs = extract_features(traces, scans)
    similarity = {pair: (f.mean_value if f is not None else None) for pair, f in inputs.acoustic.items()}
    same, cross = split_pairs(similarity, ground_truth(scenario))
    assert sum(same) / len(same) >= sum(cross) / len(cross) + 0.3


def test_far_apart_groups_use_proximity():
    traces, scans = _run(library_scenario("S1"))
    result = detect(traces, scans)
    assert result.decision_path == DecisionPath.PROXIMITY_AUDIO


def test_every_method_solves_the_clean_scenario():
    scenario = library_scenario("S1")
    traces, scans = _run(scenario)
    rows = compare(extract_features(traces, scans), ground_truth(scenario))
    assert {row.method: row.f1 for row in rows} == {m.value: 1.0 for m in Method}


def test_noisy_cafeteria_ordering():
    config = PipelineConfig()
    scores = {m: [] for m in Method}
    for seed in range(10):
        scenario = with_snr(library_scenario("S3", seed=seed), 5.0)
        traces, scans = _run(scenario)
        inputs = extract_features(traces, scans, config)
        truth = ground_truth(scenario)
        for method in Method:
            result, _ = run_method(method, inputs, config)
            scores[method].append(f1_overall(truth.as_sets(), result.detected_sets()))
    assert median(scores[Method.MEETSENSE]) >= median(scores[Method.NEXT2ME])
    assert median(scores[Method.MEETSENSE]) >= median(scores[Method.AUDIOMATCH])


def test_noise_sweep_separation():
    points = noise_sweep(library_scenario("S1"), [20.0, 15.0, 10.0, 5.0, 0.0])
    by_snr = {}
    for point in points:
        by_snr.setdefault(point.snr_db, {})[point.method] = point
    for snr_db, methods in by_snr.items():
        ours = methods[Method.MEETSENSE.value]
        assert ours.same_group_mean >= methods[Method.NEXT2ME.value].same_group_mean, snr_db
        assert abs(ours.f1 - methods[Method.AUDIOMATCH.value].f1) <= 0.15, snr_db


def test_cepstral_features_cost_less_than_fingerprints():
    traces, _ = _run(library_scenario("S1"))
    rows = {row.method: row for row in benchmark(traces, [Method.MEETSENSE, Method.AUDIOMATCH], repeats=3)}
    assert rows[Method.MEETSENSE.value].wall_s <= rows[Method.AUDIOMATCH.value].wall_s


@pytest.mark.parametrize("method", [Method.NEXT2ME, Method.AUDIOMATCH])
def test_baseline_from_raw_traces(method):
    scenario = library_scenario("S1")
    traces, scans = _run(scenario)
    result = baseline_detect(method, traces, scans)
    assert result.method == method
    assert f1_overall(ground_truth(scenario).as_sets(), result.detected_sets()) == 1.0
