"""
Tests for the WiFi proximity feature
"""

import numpy as np
import pytest

from errors import InsufficientDataError
from models import AccessPointSpec, ProximityConfig, Scenario, ScanRecord, SubjectSpec
from proximity import (
    distance_to_similarity,
    load_scans_csv,
    pair_distance,
    proximity_similarity,
    proximity_similarity_matrix,
    write_scans_csv,
)
from sim import scans_by_subject, synth_scans


def _scan(subject_id: str, t: float, **readings) -> ScanRecord:
    return ScanRecord(subject_id=subject_id, timestamp_s=t, readings={k.replace("_", ":"): v for k, v in readings.items()})


class TestPairDistance:
    def test_identical_readings(self):
        a = _scan("U1", 30.0, ap_01=-50.0, ap_02=-60.0)
        b = _scan("U2", 30.0, ap_01=-50.0, ap_02=-60.0)
        assert pair_distance(a, b) == 0.0

    def test_mean_absolute_difference(self):
        a = _scan("U1", 30.0, ap_A=-50.0, ap_B=-60.0)
        b = _scan("U2", 30.0, ap_A=-54.0, ap_B=-70.0)
        assert pair_distance(a, b) == pytest.approx(7.0)

    def test_only_common_access_points_count(self):
        a = _scan("U1", 30.0, ap_A=-50.0, ap_B=-60.0)
        b = _scan("U2", 30.0, ap_A=-54.0, ap_C=-40.0)
        assert pair_distance(a, b) == pytest.approx(4.0)

    def test_no_common_access_point(self):
        assert pair_distance(_scan("U1", 0.0, ap_A=-50.0), _scan("U2", 0.0, ap_B=-50.0)) is None


class TestSimilarity:
    @pytest.mark.parametrize(
        "distance, expected",
        [(0.0, 1.0), (30.0, 0.0), (45.0, 0.0), (7.0, 0.7667)],
    )
    def test_distance_mapping(self, distance, expected):
        assert distance_to_similarity(distance, 30.0) == pytest.approx(expected, abs=1e-4)

    def test_mapping_is_non_increasing(self):
        similarities = [distance_to_similarity(d) for d in np.linspace(0.0, 60.0, 121)]
        assert all(a >= b for a, b in zip(similarities, similarities[1:]))
        assert all(0.0 <= s <= 1.0 for s in similarities)

    def test_series_is_symmetric(self, rng):
        aps = ["ap:A", "ap:B", "ap:C", "ap:D"]

        def log(subject_id):
            return [
                ScanRecord(
                    subject_id=subject_id,
                    timestamp_s=30.0 + 60.0 * k + rng.uniform(-5.0, 5.0),
                    readings={ap: float(rng.uniform(-79.0, -40.0)) for ap in aps if rng.random() < 0.8},
                )
                for k in range(10)
            ]

        log_i, log_j = log("U1"), log("U2")
        forward = proximity_similarity(log_i, log_j)
        backward = proximity_similarity(log_j, log_i)
        assert forward.indices.tolist() == backward.indices.tolist()
        np.testing.assert_array_equal(forward.values, backward.values)

    def test_weak_readings_are_dropped(self):
        scan = _scan("U1", 0.0, ap_A=-79.0, ap_B=-80.0, ap_C=-90.0)
        assert sorted(scan.readings) == ["ap:A", "ap:B"]

    def test_series_per_bucket(self):
        log_i = [_scan("U1", 30.0, ap_A=-50.0), _scan("U1", 90.0, ap_A=-50.0), _scan("U1", 150.0, ap_A=-50.0)]
        log_j = [_scan("U2", 31.0, ap_A=-53.0), _scan("U2", 91.0, ap_A=-80.0), _scan("U2", 151.0, ap_B=-50.0)]
        series = proximity_similarity(log_i, log_j)
        assert series.indices.tolist() == [0, 1]
        np.testing.assert_allclose(series.values, [0.9, 0.0])

    def test_scans_outside_tolerance_do_not_match(self):
        log_i = [_scan("U1", 30.0, ap_A=-50.0)]
        log_j = [_scan("U2", 89.0, ap_A=-50.0)]
        with pytest.raises(InsufficientDataError):
            proximity_similarity(log_i, log_j, match_tolerance_s=10.0)

    def test_no_defined_bucket(self):
        with pytest.raises(InsufficientDataError):
            proximity_similarity([_scan("U1", 30.0, ap_A=-50.0)], [_scan("U2", 30.0, ap_B=-50.0)])

    def test_matrix_skips_pairs_without_data(self):
        logs = {
            "U1": [_scan("U1", 30.0, ap_A=-50.0)],
            "U2": [_scan("U2", 30.0, ap_A=-52.0)],
            "U3": [_scan("U3", 30.0, ap_Z=-52.0)],
        }
        matrix = proximity_similarity_matrix(logs, ProximityConfig())
        assert list(matrix) == [("U1", "U2")]


class TestScanFiles:
    def test_csv_keeps_readings(self, tmp_path):
        logs = {"U1": [_scan("U1", 30.0, ap_A=-50.0, ap_B=-61.5)], "U2": [_scan("U2", 30.0, ap_A=-55.0)]}
        path = tmp_path / "scans.csv"
        write_scans_csv(logs, path)
        loaded = load_scans_csv(path)
        assert loaded["U1"][0].readings == {"ap:A": -50.0, "ap:B": -61.5}
        assert loaded["U2"][0].timestamp_s == 30.0


class TestSimulatedScans:
    def test_colocated_pairs_score_above_distant_pairs(self):
        scenario = Scenario(
            name="rooms",
            duration_s=600.0,
            subjects=[
                SubjectSpec(id="U1", position=(0.0, 0.0)),
                SubjectSpec(id="U2", position=(2.0, 0.0)),
                SubjectSpec(id="U3", position=(20.0, 0.0)),
                SubjectSpec(id="U4", position=(22.0, 1.0)),
            ],
            access_points=[
                AccessPointSpec(id="ap:west", position=(0.0, 5.0)),
                AccessPointSpec(id="ap:mid", position=(10.0, 5.0)),
                AccessPointSpec(id="ap:east", position=(20.0, 5.0)),
                AccessPointSpec(id="ap:south", position=(10.0, -5.0)),
            ],
            rssi_sigma_db=4.0,
            seed=5,
        )
        matrix = proximity_similarity_matrix(scans_by_subject(synth_scans(scenario)))
        means = {pair: float(np.mean(series.values)) for pair, series in matrix.items()}
        near = [means[("U1", "U2")], means[("U3", "U4")]]
        far = [means[pair] for pair in [("U1", "U3"), ("U1", "U4"), ("U2", "U3"), ("U2", "U4")]]
        assert np.mean(near) > np.mean(far)
        assert min(near) > max(far)
