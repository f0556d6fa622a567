"""
WiFi proximity front end
Manhattan RSSI distance between scans and the per-bucket proximity similarity
"""

import csv
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from constants import (
    DEFAULT_TIME_BUCKET_S,
    DEFAULT_MATCH_TOLERANCE_S,
    DEFAULT_DISTANCE_CAP_DB,
    FLOAT_FORMAT,
    SCAN_CSV_HEADER,
)
from errors import DatasetError, InsufficientDataError
from models import ProximityConfig, ProximitySeries, ScanRecord
from models.graph import edge_key

logger = logging.getLogger(__name__)

ScanLog = List[ScanRecord]


# ════════════════════════════════════════════════════════════════
# SCAN CSV I/O
# ════════════════════════════════════════════════════════════════


def load_scans_csv(path: Path) -> Dict[str, ScanLog]:
    """
    Read scans from `subject_id,timestamp_s,bssid,rssi_dbm` rows.

    Rows sharing subject and timestamp form one scan; a repeated access point
    keeps its strongest reading. Readings below the cutoff are dropped.

    Returns:
        subject_id -> scans in strictly increasing time order

    Raises:
        DatasetError: Missing file, wrong header or unparsable row
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"scan file not found: {path}")

    grouped: Dict[Tuple[str, float], Dict[str, float]] = {}
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != SCAN_CSV_HEADER:
            raise DatasetError(f"{path}: expected header {','.join(SCAN_CSV_HEADER)}, got {reader.fieldnames}")
        for line, row in enumerate(reader, start=2):
            try:
                key = (row["subject_id"], float(row["timestamp_s"]))
                rssi = float(row["rssi_dbm"])
            except (TypeError, ValueError) as e:
                raise DatasetError(f"{path}:{line}: {e}") from e
            readings = grouped.setdefault(key, {})
            bssid = row["bssid"]
            readings[bssid] = max(rssi, readings.get(bssid, -np.inf))

    logs: Dict[str, ScanLog] = {}
    for (subject_id, timestamp), readings in sorted(grouped.items()):
        logs.setdefault(subject_id, []).append(
            ScanRecord(subject_id=subject_id, timestamp_s=timestamp, readings=readings)
        )
    logger.info(f"Loaded {sum(len(v) for v in logs.values())} scans for {len(logs)} subjects from {path}")
    return logs


def write_scans_csv(logs: Dict[str, ScanLog], path: Path) -> None:
    """Write scans sorted by subject, time and access point"""
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(SCAN_CSV_HEADER)
        for subject_id in sorted(logs):
            for scan in sorted(logs[subject_id], key=lambda s: s.timestamp_s):
                for bssid in sorted(scan.readings):
                    writer.writerow([
                        subject_id,
                        FLOAT_FORMAT.format(scan.timestamp_s),
                        bssid,
                        FLOAT_FORMAT.format(scan.readings[bssid]),
                    ])


# ════════════════════════════════════════════════════════════════
# DISTANCE & SIMILARITY
# ════════════════════════════════════════════════════════════════


def pair_distance(scan_i: ScanRecord, scan_j: ScanRecord) -> Optional[float]:
    """Mean |RSSI difference| over access points both scans see; None without a common one"""
    common = sorted(set(scan_i.readings) & set(scan_j.readings))
    if not common:
        return None
    return float(np.mean([abs(scan_i.readings[ap] - scan_j.readings[ap]) for ap in common]))


def distance_to_similarity(distance: float, distance_cap_db: float = DEFAULT_DISTANCE_CAP_DB) -> float:
    return 1.0 - min(distance, distance_cap_db) / distance_cap_db


def _bucket_scans(
    log: ScanLog,
    buckets: List[int],
    time_bucket_s: float,
    match_tolerance_s: float,
) -> Dict[int, ScanRecord]:
    """Scan nearest each bucket centre within the tolerance; ties go to the earlier scan"""
    times = np.array([s.timestamp_s for s in log])
    chosen: Dict[int, ScanRecord] = {}
    for bucket in buckets:
        centre = (bucket + 0.5) * time_bucket_s
        gaps = np.abs(times - centre)
        k = int(np.argmin(gaps))
        if gaps[k] <= match_tolerance_s:
            chosen[bucket] = log[k]
    return chosen


def proximity_similarity(
    log_i: ScanLog,
    log_j: ScanLog,
    time_bucket_s: float = DEFAULT_TIME_BUCKET_S,
    match_tolerance_s: float = DEFAULT_MATCH_TOLERANCE_S,
    distance_cap_db: float = DEFAULT_DISTANCE_CAP_DB,
) -> ProximitySeries:
    """
    Per-bucket proximity similarity of two subjects.

    Args:
        log_i: Scans of the first subject
        log_j: Scans of the second subject
        time_bucket_s: Bucket length
        match_tolerance_s: Max distance of a scan from the bucket centre
        distance_cap_db: Distance mapped to similarity 0

    Returns:
        ProximitySeries over the buckets with a defined distance

    Raises:
        InsufficientDataError: If no bucket has a defined distance
    """
    if not log_i or not log_j:
        raise InsufficientDataError("proximity needs scans from both subjects")
    subject_i, subject_j = log_i[0].subject_id, log_j[0].subject_id

    buckets = sorted(
        {int(np.floor(s.timestamp_s / time_bucket_s)) for s in log_i}
        | {int(np.floor(s.timestamp_s / time_bucket_s)) for s in log_j}
    )
    scans_i = _bucket_scans(log_i, buckets, time_bucket_s, match_tolerance_s)
    scans_j = _bucket_scans(log_j, buckets, time_bucket_s, match_tolerance_s)

    indices: List[int] = []
    values: List[float] = []
    for bucket in buckets:
        if bucket not in scans_i or bucket not in scans_j:
            continue
        distance = pair_distance(scans_i[bucket], scans_j[bucket])
        if distance is None:
            continue
        indices.append(bucket)
        values.append(distance_to_similarity(distance, distance_cap_db))

    if not values:
        raise InsufficientDataError(f"{subject_i} and {subject_j} share no bucket with a common access point")
    return ProximitySeries(subject_i=subject_i, subject_j=subject_j, indices=indices, values=values)


def proximity_similarity_matrix(
    logs: Dict[str, ScanLog],
    config: Optional[ProximityConfig] = None,
) -> Dict[Tuple[str, str], ProximitySeries]:
    """Proximity series for every pair of scanning subjects; pairs without data are left out"""
    config = config or ProximityConfig()
    subjects = sorted(s for s, log in logs.items() if log)
    result: Dict[Tuple[str, str], ProximitySeries] = {}
    for a, i in enumerate(subjects):
        for j in subjects[a + 1:]:
            try:
                result[edge_key(i, j)] = proximity_similarity(
                    logs[i], logs[j], config.time_bucket_s, config.match_tolerance_s, config.distance_cap_db
                )
            except InsufficientDataError as e:
                logger.warning(f"No proximity feature for ({i}, {j}): {e}")
    return result
