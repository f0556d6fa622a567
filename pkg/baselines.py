"""
Audio baselines
Next2Me (Jaccard over the top-n FFT bins) and AudioMatch (16-bit STFT
fingerprints compared by Hamming distance), plus their detection pipeline
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import signal

from audio import check_same_span, is_silent
from communities import build_graph, detect_communities, modularity
from detector import extract_features
from constants import (
    Branch,
    CommunityAlgorithm,
    DecisionPath,
    DEFAULT_BAND_LOW_HZ,
    DEFAULT_BAND_HIGH_HZ,
    DEFAULT_FINGERPRINT_OVERLAP,
    DEFAULT_FINGERPRINT_WINDOW_S,
    DEFAULT_SEGMENT_LEN_S,
    DEFAULT_TOP_N_FREQUENCIES,
    FINGERPRINT_BITS,
    Method,
)
from errors import ParameterError
from models import (
    AnalysisInputs,
    AudioTrace,
    BaselineConfig,
    FingerprintSeries,
    GroupResult,
    PairFeatureSeries,
    PipelineConfig,
    ScanRecord,
    SimilarityGraph,
)
from models.graph import edge_key

logger = logging.getLogger(__name__)

# Outer ring of the 5x5 neighbourhood: 16 (row, column) offsets
RING_OFFSETS: List[Tuple[int, int]] = [
    (dr, dc) for dr in range(-2, 3) for dc in range(-2, 3) if max(abs(dr), abs(dc)) == 2
]


def _windows(trace: AudioTrace, window_s: float) -> List[Optional[np.ndarray]]:
    """Whole non-overlapping windows; None where the window is silent"""
    length = int(round(window_s * trace.sample_rate_hz))
    if length < 2:
        raise ParameterError(f"window of {window_s} s is shorter than two samples")
    chunks = []
    for k in range(trace.n_samples // length):
        chunk = trace.samples[k * length:(k + 1) * length]
        chunks.append(None if is_silent(chunk) else chunk)
    return chunks


# ════════════════════════════════════════════════════════════════
# NEXT2ME
# ════════════════════════════════════════════════════════════════


def top_frequency_bins(samples: np.ndarray, n: int) -> frozenset:
    """Indices of the n largest FFT magnitudes (stable on ties)"""
    magnitude = np.abs(np.fft.rfft(samples))
    return frozenset(np.argsort(-magnitude, kind="stable")[:n].tolist())


def _jaccard(a: Optional[frozenset], b: Optional[frozenset]) -> float:
    if a is None or b is None:
        return float("nan")
    return len(a & b) / len(a | b)


def _next2me_sets(trace: AudioTrace, n: int, window_s: float) -> List[Optional[frozenset]]:
    return [None if w is None else top_frequency_bins(w, n) for w in _windows(trace, window_s)]


def _next2me_series(i: str, j: str, sets_i, sets_j) -> FingerprintSeries:
    values = np.array([_jaccard(a, b) for a, b in zip(sets_i, sets_j)])
    return FingerprintSeries(
        subject_i=i,
        subject_j=j,
        kind=Method.NEXT2ME.value,
        method=Method.NEXT2ME,
        indices=np.arange(values.size),
        values=values,
    )


def next2me_similarity(
    trace_i: AudioTrace,
    trace_j: AudioTrace,
    n: int = DEFAULT_TOP_N_FREQUENCIES,
    window_s: float = DEFAULT_SEGMENT_LEN_S,
) -> FingerprintSeries:
    """
    Per-window Jaccard similarity of the two traces' top-n frequency bins.

    Args:
        trace_i: First trace (aligned, preprocessed)
        trace_j: Second trace, same span
        n: Number of strongest bins per window
        window_s: FFT window; a trailing partial window is skipped

    Returns:
        FingerprintSeries; silent windows are NaN
    """
    check_same_span(trace_i, trace_j)
    return _next2me_series(
        trace_i.subject_id,
        trace_j.subject_id,
        _next2me_sets(trace_i, n, window_s),
        _next2me_sets(trace_j, n, window_s),
    )


# ════════════════════════════════════════════════════════════════
# AUDIOMATCH
# ════════════════════════════════════════════════════════════════


def fingerprint(
    trace: AudioTrace,
    window_s: float = DEFAULT_FINGERPRINT_WINDOW_S,
    overlap: float = DEFAULT_FINGERPRINT_OVERLAP,
    band: Optional[Tuple[float, float]] = (DEFAULT_BAND_LOW_HZ, DEFAULT_BAND_HIGH_HZ),
) -> Tuple[np.ndarray, np.ndarray]:
    """
    16-bit words of a log-magnitude spectrogram.

    Each bit states whether a cell is louder than one of the 16 cells on the
    outer ring of its 5x5 time-frequency neighbourhood.

    Args:
        trace: Input trace
        window_s: Hamming window length
        overlap: Fraction of window overlap
        band: Frequency rows kept (None = all)

    Returns:
        (bits of shape (rows, frames, 16), frame centre times relative to the trace start)
    """
    fs = trace.sample_rate_hz
    nperseg = int(round(window_s * fs))
    noverlap = int(round(nperseg * overlap))
    frequencies, times, spectrum = signal.stft(
        trace.samples,
        fs=fs,
        window="hamming",
        nperseg=nperseg,
        noverlap=noverlap,
        boundary=None,
        padded=False,
    )
    log_magnitude = np.log(np.abs(spectrum) + 1e-12)
    if band is not None:
        log_magnitude = log_magnitude[(frequencies >= band[0]) & (frequencies <= band[1])]

    rows, frames = log_magnitude.shape
    if rows < 5 or frames < 5:
        return np.zeros((0, 0, FINGERPRINT_BITS), dtype=bool), np.array([])

    centre = log_magnitude[2:rows - 2, 2:frames - 2]
    bits = np.stack(
        [centre > log_magnitude[2 + dr:rows - 2 + dr, 2 + dc:frames - 2 + dc] for dr, dc in RING_OFFSETS],
        axis=-1,
    )
    return bits, times[2:frames - 2]


def _audiomatch_series(
    i: str,
    j: str,
    print_i: Tuple[np.ndarray, np.ndarray],
    print_j: Tuple[np.ndarray, np.ndarray],
    silent_i: List[bool],
    silent_j: List[bool],
    comparison_window_s: float,
) -> FingerprintSeries:
    bits_i, times = print_i
    bits_j, _ = print_j
    n_windows = len(silent_i)
    values = np.full(n_windows, np.nan)
    distances = np.full(n_windows, np.nan)
    if bits_i.size:
        # per-word Hamming distance, averaged over the rows of each frame
        frame_distance = (bits_i != bits_j).sum(axis=-1).mean(axis=0)
        window_index = np.floor(times / comparison_window_s).astype(int)
        for k in range(n_windows):
            if silent_i[k] or silent_j[k]:
                continue
            in_window = window_index == k
            if not in_window.any():
                continue
            distances[k] = float(frame_distance[in_window].mean())
            values[k] = 1.0 - distances[k] / FINGERPRINT_BITS
    return FingerprintSeries(
        subject_i=i,
        subject_j=j,
        kind=Method.AUDIOMATCH.value,
        method=Method.AUDIOMATCH,
        indices=np.arange(n_windows),
        values=values,
        distances=distances,
    )


def _silence_mask(trace: AudioTrace, window_s: float) -> List[bool]:
    return [w is None for w in _windows(trace, window_s)]


def _print_args(config: BaselineConfig, band: Tuple[float, float]) -> dict:
    return {
        "window_s": config.fingerprint_window_s,
        "overlap": config.fingerprint_overlap,
        "band": band if config.restrict_to_band else None,
    }


def audiomatch_similarity(
    trace_i: AudioTrace,
    trace_j: AudioTrace,
    config: Optional[BaselineConfig] = None,
    band: Tuple[float, float] = (DEFAULT_BAND_LOW_HZ, DEFAULT_BAND_HIGH_HZ),
) -> FingerprintSeries:
    """
    Per-window fingerprint similarity, 1 - mean Hamming distance / 16.

    Returns:
        FingerprintSeries with the mean distances kept alongside; silent windows are NaN
    """
    config = config or BaselineConfig()
    check_same_span(trace_i, trace_j)
    window_s = config.comparison_window_s
    return _audiomatch_series(
        trace_i.subject_id,
        trace_j.subject_id,
        fingerprint(trace_i, **_print_args(config, band)),
        fingerprint(trace_j, **_print_args(config, band)),
        _silence_mask(trace_i, window_s),
        _silence_mask(trace_j, window_s),
        window_s,
    )


# ════════════════════════════════════════════════════════════════
# PAIRWISE MATRICES
# ════════════════════════════════════════════════════════════════


def _pairs(traces: Sequence[AudioTrace]) -> List[Tuple[AudioTrace, AudioTrace]]:
    ordered = sorted(traces, key=lambda t: t.subject_id)
    for other in ordered[1:]:
        check_same_span(ordered[0], other)
    return [(a, b) for k, a in enumerate(ordered) for b in ordered[k + 1:]]


def next2me_similarity_matrix(
    traces: Sequence[AudioTrace],
    config: Optional[BaselineConfig] = None,
) -> Dict[Tuple[str, str], FingerprintSeries]:
    config = config or BaselineConfig()
    sets = {t.subject_id: _next2me_sets(t, config.top_n, config.next2me_window_s) for t in traces}
    return {
        edge_key(a.subject_id, b.subject_id): _next2me_series(
            a.subject_id, b.subject_id, sets[a.subject_id], sets[b.subject_id]
        )
        for a, b in _pairs(traces)
    }


def audiomatch_similarity_matrix(
    traces: Sequence[AudioTrace],
    config: Optional[BaselineConfig] = None,
    band: Tuple[float, float] = (DEFAULT_BAND_LOW_HZ, DEFAULT_BAND_HIGH_HZ),
) -> Dict[Tuple[str, str], FingerprintSeries]:
    config = config or BaselineConfig()
    window_s = config.comparison_window_s
    prints = {t.subject_id: fingerprint(t, **_print_args(config, band)) for t in traces}
    silences = {t.subject_id: _silence_mask(t, window_s) for t in traces}
    return {
        edge_key(a.subject_id, b.subject_id): _audiomatch_series(
            a.subject_id,
            b.subject_id,
            prints[a.subject_id],
            prints[b.subject_id],
            silences[a.subject_id],
            silences[b.subject_id],
            window_s,
        )
        for a, b in _pairs(traces)
    }


ALGORITHM: Dict[Method, CommunityAlgorithm] = {
    Method.NEXT2ME: CommunityAlgorithm.LOUVAIN,
    Method.AUDIOMATCH: CommunityAlgorithm.WALKTRAP,
}


# ════════════════════════════════════════════════════════════════
# DETECTION
# ════════════════════════════════════════════════════════════════


def series_means(series: Dict[Tuple[str, str], PairFeatureSeries]) -> Dict[Tuple[str, str], Optional[float]]:
    """Plain mean of the defined values per pair (None when nothing is defined)"""
    means: Dict[Tuple[str, str], Optional[float]] = {}
    for pair, s in series.items():
        present = s.present()
        means[pair] = float(present.mean()) if present.size else None
    return means


def _mean_graph(members: Sequence[str], means: Dict[Tuple[str, str], Optional[float]]) -> SimilarityGraph:
    weights = {}
    for k, i in enumerate(members):
        for j in members[k + 1:]:
            value = means.get(edge_key(i, j))
            weights[(i, j)] = value if value is not None else 0.0
    return build_graph(list(members), weights)


def baseline_similarity_matrix(
    method: Method,
    traces: Sequence[AudioTrace],
    config: Optional[PipelineConfig] = None,
) -> Dict[Tuple[str, str], FingerprintSeries]:
    """Per-window similarity series of a baseline for every pair"""
    config = config or PipelineConfig()
    if method == Method.AUDIOMATCH:
        return audiomatch_similarity_matrix(traces, config.baselines, config.band())
    if method == Method.NEXT2ME:
        return next2me_similarity_matrix(traces, config.baselines)
    raise ParameterError(f"{method.value} is not a baseline")


def baseline_detect_from_inputs(
    method: Method,
    inputs: AnalysisInputs,
    config: Optional[PipelineConfig] = None,
    series: Optional[Dict[Tuple[str, str], FingerprintSeries]] = None,
) -> GroupResult:
    """
    Baseline pipeline: proximity clusters without a modularity gate, then the
    baseline's audio graph inside each cluster.

    Next2Me clusters with Louvain, AudioMatch with Walktrap. Precomputed
    similarity series may be passed in to skip their computation.
    """
    config = config or PipelineConfig()
    if method not in ALGORITHM:
        raise ParameterError(f"{method.value} is not a baseline")
    algorithm = ALGORITHM[method]

    def _detect(graph: SimilarityGraph):
        return detect_communities(graph, algorithm, config.community.walk_length, config.community.seed)

    if series is None:
        series = baseline_similarity_matrix(method, inputs.traces, config)
    means = series_means(series)

    modularities: Dict[str, float] = {}
    scanning = [s for s in inputs.subjects if s in set(inputs.scanning)]
    if len(scanning) >= 2:
        proximity_graph = _mean_graph(scanning, {
            pair: (f.mean_value if f is not None else None) for pair, f in inputs.proximity.items()
        })
        proximity_partition = _detect(proximity_graph)
        modularities["proximity"] = proximity_partition.modularity
        clusters = proximity_partition.communities()
        rest = [s for s in inputs.subjects if s not in set(scanning)]
        if rest:
            clusters.append(rest)
        decision_path = DecisionPath.PROXIMITY_AUDIO
    else:
        clusters = [list(inputs.subjects)]
        decision_path = DecisionPath.AUDIO_ONLY

    groups: List[List[str]] = []
    for cluster in clusters:
        if len(cluster) < 2:
            continue
        partition = _detect(_mean_graph(cluster, means))
        groups.extend(c for c in partition.communities() if len(c) >= 2)

    full_graph = _mean_graph(inputs.subjects, means)
    grouped = {m for g in groups for m in g}
    ungrouped = [s for s in inputs.subjects if s not in grouped]
    if full_graph.total_weight() > 0.0:
        assignment = {m: k for k, g in enumerate(groups) for m in g}
        assignment.update({s: len(groups) + k for k, s in enumerate(ungrouped)})
        modularities["audio"] = modularity(full_graph, assignment)
    else:
        modularities["audio"] = 0.0

    logger.info(f"{method.value}: {len(groups)} groups, M={modularities['audio']:.4f}")
    return GroupResult(
        groups=groups,
        ungrouped=ungrouped,
        modularities=modularities,
        decision_path=decision_path if groups else DecisionPath.REJECTED,
        branch=Branch.BASELINE,
        window=inputs.window,
        method=method,
        deciding_stage="audio",
    )


def baseline_detect(
    method: Method,
    traces: Sequence[AudioTrace],
    scans: Optional[Dict[str, List[ScanRecord]]] = None,
    config: Optional[PipelineConfig] = None,
) -> GroupResult:
    """Run a baseline end to end on raw traces and optional scans"""
    config = config or PipelineConfig()
    return baseline_detect_from_inputs(method, extract_features(traces, scans, config), config)
