"""
Tests for the dataset, export and pipeline services and the command line
"""

import json
import shutil
from io import BytesIO

import numpy as np
import pytest
from openpyxl import load_workbook

from cli import main
from communities import load_edge_csv, load_partition_json
from constants import (
    ACOUSTIC_GRAPH_FILE,
    AUDIO_DIR,
    AUDIO_INDEX_FILE,
    COMPARE_FILE,
    MANIFEST_FILE,
    PARTITION_FILE,
    PROXIMITY_GRAPH_FILE,
    RESULT_FILE,
    SCANS_FILE,
    DecisionPath,
    Method,
)
from detector import feature_graph, find_communities
from errors import DatasetError
from models import EvalReport, EvalRow, PipelineConfig, RunManifest, SweepPoint
from services import (
    create_excel_export,
    create_pdf_export,
    detect_dataset,
    get_report_statistics,
    load_dataset,
    replay,
    resolve_config,
    resolve_dataset,
    run_compare,
    run_detect,
    run_features,
    run_gen,
    run_sweep,
    write_dataset,
)
from sim import library_scenario, save_scenario, synth_audio


@pytest.fixture
def scenario_file(tmp_path):
    """S1 shortened to 20 s at 8 kHz, scanning every 5 s"""
    scenario = library_scenario("S1").model_copy(
        update={"duration_s": 20.0, "sample_rate_hz": 8000, "scan_interval_s": 5.0}
    )
    path = tmp_path / "s1.json"
    save_scenario(scenario, path)
    return path


@pytest.fixture
def dataset_dir(tmp_path, scenario_file):
    out = tmp_path / "ds"
    run_gen(scenario_file, out)
    return out


def _report() -> EvalReport:
    return EvalReport(rows=[
        EvalRow(scenario="S1", method="meetsense", f1=1.0, modularity=0.41, decision_path="proximity+audio"),
        EvalRow(scenario="S1", method="next2me", f1=0.5, modularity=0.12, decision_path="proximity+audio"),
    ])


class TestDataset:
    def test_generated_layout(self, dataset_dir):
        assert (dataset_dir / AUDIO_DIR / AUDIO_INDEX_FILE).exists()
        assert sorted(p.name for p in (dataset_dir / AUDIO_DIR).glob("*.wav")) == [
            f"U{k}.wav" for k in range(1, 7)
        ]
        manifest = RunManifest.load(dataset_dir / MANIFEST_FILE)
        assert manifest.command == "gen"
        assert any(path.endswith("U1.wav") for path in manifest.input_hashes)

    def test_load_keeps_samples_and_truth(self, dataset_dir, scenario_file):
        dataset = load_dataset(dataset_dir)
        assert dataset.name == "S1"
        assert dataset.truth.groups == [["U1", "U2", "U3"], ["U4", "U5", "U6"]]
        assert sorted(dataset.scans) == [f"U{k}" for k in range(1, 7)]
        rendered = {t.subject_id: t for t in synth_audio(dataset.scenario)}
        for trace in dataset.traces:
            np.testing.assert_allclose(trace.samples, rendered[trace.subject_id].samples, atol=1.0 / 32768)
            assert trace.start_time == rendered[trace.subject_id].start_time

    def test_missing_directory(self, tmp_path):
        with pytest.raises(DatasetError):
            load_dataset(tmp_path / "nowhere")


class TestPipeline:
    def test_detect_writes_result(self, dataset_dir, tmp_path):
        out = tmp_path / "run"
        result = run_detect(dataset_dir, PipelineConfig(), out, seed=7)
        document = json.loads((out / RESULT_FILE).read_text())
        assert document["groups"] == result.groups
        config, seed = replay(out / MANIFEST_FILE)
        assert seed == 7
        assert config.community.seed == 7

    def test_detect_without_writing(self, dataset_dir):
        result = detect_dataset(dataset_dir)
        assert result.members() == [f"U{k}" for k in range(1, 7)]

    def test_compare_is_deterministic(self, dataset_dir, tmp_path):
        methods = [Method.MEETSENSE, Method.NEXT2ME]
        run_compare([dataset_dir], PipelineConfig(), tmp_path / "a", seed=3, methods=methods)
        run_compare([dataset_dir], PipelineConfig(), tmp_path / "b", seed=3, methods=methods)
        first = (tmp_path / "a" / COMPARE_FILE).read_bytes()
        assert first == (tmp_path / "b" / COMPARE_FILE).read_bytes()
        assert RunManifest.load(tmp_path / "a" / MANIFEST_FILE).fingerprint() == \
            RunManifest.load(tmp_path / "b" / MANIFEST_FILE).fingerprint()

    def test_compare_needs_ground_truth(self, dataset_dir, tmp_path):
        bare = tmp_path / "bare"
        write_dataset(bare, load_dataset(dataset_dir).traces)
        with pytest.raises(DatasetError):
            run_compare([bare], PipelineConfig(), tmp_path / "out", methods=[Method.MEETSENSE])

    def test_config_from_environment(self, tmp_path, monkeypatch):
        config = PipelineConfig()
        config.detector.delta_p1 = 0.4
        path = tmp_path / "config.json"
        config.dump(path)
        monkeypatch.setenv("MEETSENSE_CONFIG", str(path))
        assert resolve_config().detector.delta_p1 == 0.4
        assert resolve_config(None).audio == PipelineConfig().audio

    def test_features_write_graphs_and_partition(self, dataset_dir, tmp_path):
        out = tmp_path / "features"
        inputs = run_features(dataset_dir, PipelineConfig(), out)
        acoustic = load_edge_csv(out / ACOUSTIC_GRAPH_FILE)
        assert acoustic.nodes == inputs.subjects
        for (i, j), weight in acoustic.weights.items():
            assert weight == pytest.approx(max(inputs.acoustic_mean(i, j) or 0.0, 0.0), abs=1e-4)
        assert load_edge_csv(out / PROXIMITY_GRAPH_FILE).nodes == inputs.scanning
        expected = find_communities(feature_graph(inputs, "acoustic"))
        partition = load_partition_json(out / PARTITION_FILE)
        assert partition.communities() == expected.communities()
        assert partition.modularity == pytest.approx(expected.modularity, abs=1e-6)

    def test_sweep_workbook(self, tmp_path, monkeypatch):
        points = [
            SweepPoint(snr_db=None, method="meetsense", f1=1.0, same_group_mean=0.8, cross_group_mean=0.1),
            SweepPoint(snr_db=5.0, method="meetsense", f1=0.5, same_group_mean=0.4, cross_group_mean=0.2),
        ]
        monkeypatch.setattr("services.pipeline_service.noise_sweep", lambda *args, **kwargs: points)
        out = tmp_path / "sweep"
        assert run_sweep("S1", PipelineConfig(), out, seed=1, snr_grid=[5.0], xlsx=True) == points
        sheet = load_workbook(out / "sweep.xlsx")["Noise sweep"]
        rows = list(sheet.iter_rows(min_row=2, values_only=True))
        assert [row[0] for row in rows] == ["none", 5.0]
        assert [row[2] for row in rows] == [1.0, 0.5]


class TestExport:
    def test_statistics(self):
        stats = get_report_statistics(_report())
        assert stats["scenarios"] == 1
        assert stats["methods"] == 2
        assert get_report_statistics(EvalReport())["mean_f1"] == {}

    def test_workbook_and_pdf(self):
        assert create_excel_export(_report())[:2] == b"PK"
        assert create_pdf_export(_report())[:4] == b"%PDF"

    def test_sweep_sheet_only_when_given(self):
        point = SweepPoint(snr_db=10.0, method="next2me", f1=0.75)
        with_sweep = load_workbook(BytesIO(create_excel_export(EvalReport(), sweep=[point])))
        assert with_sweep.sheetnames == ["Comparison", "F1 table", "Overall", "Noise sweep"]
        assert list(with_sweep["Noise sweep"].iter_rows(min_row=2, values_only=True)) == [
            (10.0, "Next2Me", 0.75, None, None)
        ]
        assert "Noise sweep" not in load_workbook(BytesIO(create_excel_export(_report()))).sheetnames


class TestCli:
    def test_scenarios(self, capsys):
        assert main(["scenarios"]) == 0
        assert "S1" in capsys.readouterr().out

    def test_config_document(self, tmp_path):
        assert main(["config", "--out", str(tmp_path)]) == 0
        assert PipelineConfig.load(tmp_path / "config.json") == PipelineConfig()

    def test_missing_dataset_is_an_error(self, tmp_path):
        assert main(["detect", str(tmp_path / "nowhere"), "--out", str(tmp_path / "run")]) == 1

    def test_unknown_scenario_is_an_error(self, tmp_path):
        assert main(["gen", "S9", "--out", str(tmp_path / "ds")]) == 1

    def test_usage_error(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["frobnicate"])
        assert excinfo.value.code == 2


class TestSplitRecordings:
    """Audio and scans stored apart from each other, outside the dataset layout"""

    @pytest.fixture
    def recordings(self, dataset_dir, tmp_path):
        audio_dir = tmp_path / "phones" / "audio"
        scans = tmp_path / "wifi" / "scans.csv"
        shutil.copytree(dataset_dir / AUDIO_DIR, audio_dir)
        scans.parent.mkdir()
        shutil.copy(dataset_dir / SCANS_FILE, scans)
        return audio_dir, scans

    def test_detect_from_audio_dir_and_scan_file(self, recordings, dataset_dir, tmp_path):
        audio_dir, scans = recordings
        out = tmp_path / "run"
        code = main(["detect", "--audio-dir", str(audio_dir), "--scans", str(scans), "--out", str(out), "--seed", "7"])
        assert code == 0
        document = json.loads((out / RESULT_FILE).read_text())
        assert document["groups"] == detect_dataset(dataset_dir).groups
        assert document["decision_path"] != DecisionPath.AUDIO_ONLY.value
        manifest = RunManifest.load(out / MANIFEST_FILE)
        assert "scans.csv" in manifest.input_hashes
        assert any(path.endswith("U1.wav") for path in manifest.input_hashes)

    def test_audio_dir_without_scans_runs_audio_only(self, recordings, tmp_path):
        audio_dir, _ = recordings
        dataset = resolve_dataset(audio_dir=audio_dir)
        assert dataset.scans == {}
        assert dataset.truth is None
        result = run_detect(dataset, PipelineConfig(), tmp_path / "run")
        assert result.decision_path in (DecisionPath.AUDIO_ONLY, DecisionPath.REJECTED)
        assert result.members() == [f"U{k}" for k in range(1, 7)]

    def test_scan_file_overrides_dataset_scans(self, recordings, dataset_dir):
        _, scans = recordings
        dataset = resolve_dataset(dataset_dir, scans_path=scans)
        assert dataset.scans_path == scans
        assert sorted(dataset.scans) == [f"U{k}" for k in range(1, 7)]

    @pytest.mark.parametrize("args", [[], ["DATASET", "--audio-dir", "AUDIO"]])
    def test_needs_exactly_one_source(self, recordings, dataset_dir, tmp_path, args):
        audio_dir, _ = recordings
        args = [str(dataset_dir) if a == "DATASET" else str(audio_dir) if a == "AUDIO" else a for a in args]
        assert main(["detect", *args, "--out", str(tmp_path / "run")]) == 1

    def test_missing_scan_file(self, recordings, tmp_path):
        audio_dir, _ = recordings
        with pytest.raises(DatasetError):
            resolve_dataset(audio_dir=audio_dir, scans_path=tmp_path / "nope.csv")
