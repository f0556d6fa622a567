"""
Dataset Service
Reads and writes the dataset directory layout: per-subject WAV files with a
start-time index, the scan log, ground truth, the scenario and feature CSVs
"""

import csv
import hashlib
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from audio import load_wav, write_wav
from constants import (
    AUDIO_DIR,
    AUDIO_INDEX_FILE,
    FLOAT_FORMAT,
    PAIR_SERIES_CSV_HEADER,
    REFINED_CSV_HEADER,
    SCANS_FILE,
    SCENARIO_FILE,
    TRUTH_FILE,
)
from errors import DatasetError
from models import AudioTrace, GroundTruth, PairFeatureSeries, RefinedFeature, Scenario, ScanRecord
from proximity import load_scans_csv, write_scans_csv
from sim import save_scenario

logger = logging.getLogger(__name__)

ScanLogs = Dict[str, List[ScanRecord]]


class Dataset(BaseModel):
    """
    One recorded (or simulated) session

    Attributes:
        root: Dataset directory
        traces: One trace per subject
        scans: Scan logs of the subjects that have them
        truth: Ground truth, when known
        scenario: Generating scenario, for simulated datasets
        scans_path: Scan file kept outside root, when the recordings are split
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    root: Path
    traces: List[AudioTrace]
    scans: ScanLogs = Field(default_factory=dict)
    truth: Optional[GroundTruth] = None
    scenario: Optional[Scenario] = None
    scans_path: Optional[Path] = None

    @property
    def name(self) -> str:
        if self.scenario is not None:
            return self.scenario.name
        if self.truth is not None and self.truth.scenario:
            return self.truth.scenario
        return self.root.name


# ════════════════════════════════════════════════════════════════
# WRITING
# ════════════════════════════════════════════════════════════════


def write_dataset(
    out_dir: Path,
    traces: List[AudioTrace],
    scans: Optional[ScanLogs] = None,
    truth: Optional[GroundTruth] = None,
    scenario: Optional[Scenario] = None,
) -> Dict[str, str]:
    """
    Write a dataset directory.

    Returns:
        Relative path -> SHA-256 of every file written

    Raises:
        OSError: If the directory cannot be created or written
    """
    out_dir = Path(out_dir)
    audio_dir = out_dir / AUDIO_DIR
    audio_dir.mkdir(parents=True, exist_ok=True)

    index = {}
    for trace in sorted(traces, key=lambda t: t.subject_id):
        filename = f"{trace.subject_id}.wav"
        write_wav(trace, audio_dir / filename)
        index[trace.subject_id] = {
            "file": filename,
            "start_time": trace.start_time,
            "sample_rate_hz": trace.sample_rate_hz,
        }
    _write_json(audio_dir / AUDIO_INDEX_FILE, index)

    if scans:
        write_scans_csv(scans, out_dir / SCANS_FILE)
    if truth is not None:
        _write_json(out_dir / TRUTH_FILE, truth.model_dump(mode="json"))
    if scenario is not None:
        save_scenario(scenario, out_dir / SCENARIO_FILE)

    logger.info(f"Wrote dataset with {len(traces)} subjects to {out_dir}")
    return file_hashes(out_dir)


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# ════════════════════════════════════════════════════════════════
# READING
# ════════════════════════════════════════════════════════════════


def load_traces(audio_dir: Path) -> List[AudioTrace]:
    """
    Every subject's trace; start times come from the index when present,
    otherwise each WAV starts at 0 and is named after its file.
    """
    audio_dir = Path(audio_dir)
    if not audio_dir.is_dir():
        raise DatasetError(f"audio directory not found: {audio_dir}")
    index_path = audio_dir / AUDIO_INDEX_FILE
    if index_path.exists():
        index = json.loads(index_path.read_text(encoding="utf-8"))
        return [
            load_wav(audio_dir / entry["file"], subject_id, entry.get("start_time", 0.0))
            for subject_id, entry in sorted(index.items())
        ]
    paths = sorted(audio_dir.glob("*.wav"))
    if not paths:
        raise DatasetError(f"no WAV files in {audio_dir}")
    return [load_wav(p) for p in paths]


def load_truth(path: Path) -> GroundTruth:
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"ground truth not found: {path}")
    return GroundTruth.model_validate_json(path.read_text(encoding="utf-8"))


def load_dataset(root: Path) -> Dataset:
    """
    Read a dataset directory; scans, truth and scenario are optional.

    Raises:
        DatasetError: If the directory or its audio is missing
    """
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"dataset directory not found: {root}")
    scans_path = root / SCANS_FILE
    truth_path = root / TRUTH_FILE
    scenario_path = root / SCENARIO_FILE
    return Dataset(
        root=root,
        traces=load_traces(root / AUDIO_DIR),
        scans=load_scans_csv(scans_path) if scans_path.exists() else {},
        truth=load_truth(truth_path) if truth_path.exists() else None,
        scenario=(
            Scenario.model_validate_json(scenario_path.read_text(encoding="utf-8"))
            if scenario_path.exists()
            else None
        ),
    )


def load_recordings(audio_dir: Path, scans_path: Optional[Path] = None) -> Dataset:
    """
    Traces from a bare audio directory plus an optional scan file stored
    elsewhere; there is no ground truth.

    Raises:
        DatasetError: If the audio directory or the scan file is missing
    """
    audio_dir = Path(audio_dir)
    scans_path = Path(scans_path) if scans_path is not None else None
    return Dataset(
        root=audio_dir,
        traces=load_traces(audio_dir),
        scans=load_scans_csv(scans_path) if scans_path is not None else {},
        scans_path=scans_path,
    )


def file_hashes(root: Path) -> Dict[str, str]:
    """SHA-256 of every file under root, keyed by POSIX relative path"""
    root = Path(root)
    hashes = {}
    for path in sorted(p for p in root.rglob("*") if p.is_file()):
        hashes[path.relative_to(root).as_posix()] = hashlib.sha256(path.read_bytes()).hexdigest()
    return hashes


# ════════════════════════════════════════════════════════════════
# FEATURE CSVs
# ════════════════════════════════════════════════════════════════


def write_pair_series_csv(series: Dict[Tuple[str, str], PairFeatureSeries], path: Path) -> None:
    """Long format, one row per pair and index; absent values are left empty"""
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(PAIR_SERIES_CSV_HEADER)
        for pair in sorted(series):
            s = series[pair]
            for index, value in zip(s.indices, s.values):
                writer.writerow([s.subject_i, s.subject_j, int(index), FLOAT_FORMAT.format(value) if np.isfinite(value) else ""])


def write_refined_csv(refined: Dict[str, Dict[Tuple[str, str], Optional[RefinedFeature]]], path: Path) -> None:
    """Refined means of every kind ("acoustic", "proximity") and pair"""
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(REFINED_CSV_HEADER)
        for kind in sorted(refined):
            for (i, j), feature in sorted(refined[kind].items()):
                if feature is None:
                    writer.writerow([i, j, kind, "", 0, 0, ""])
                    continue
                writer.writerow([
                    i,
                    j,
                    kind,
                    FLOAT_FORMAT.format(feature.mean_value),
                    feature.used_count,
                    feature.total_count,
                    str(feature.single_cluster).lower(),
                ])
