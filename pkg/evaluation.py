"""
Evaluation
F1 scoring against ground truth, method comparison, noise sweeps, same- vs
cross-group similarity separation and feature-cost benchmarks
"""

import logging
import time
import tracemalloc
from statistics import mean
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from audio import acoustic_similarity_matrix, preprocess
from baselines import baseline_detect_from_inputs, baseline_similarity_matrix, series_means
from communities import walktrap
from constants import Assignment, Method
from detector import detect_from_inputs, extract_features, feature_graph
from models import (
    AnalysisInputs,
    AudioTrace,
    BenchmarkRow,
    EvalRow,
    GroundTruth,
    GroupResult,
    MergeStep,
    PipelineConfig,
    Scenario,
    SeparationStats,
    SweepPoint,
)
from sim import ground_truth, scans_by_subject, synth_audio, synth_scans, with_snr

logger = logging.getLogger(__name__)

Pair = Tuple[str, str]
Similarity = Dict[Pair, Optional[float]]


# ════════════════════════════════════════════════════════════════
# F1 SCORE
# ════════════════════════════════════════════════════════════════


def f1_pair(truth_group: Iterable[str], detected_group: Iterable[str]) -> float:
    """2·|truth ∩ detected| / (|truth| + |detected|); an empty detected group scores 0"""
    truth_group, detected_group = set(truth_group), set(detected_group)
    if not detected_group:
        return 0.0
    return 2.0 * len(truth_group & detected_group) / (len(truth_group) + len(detected_group))


def f1_overall(
    truth: Sequence[Set[str]],
    detected: Sequence[Set[str]],
    assignment: Assignment = Assignment.BEST,
) -> float:
    """
    Average F1 over the detected groups.

    Args:
        truth: Ground-truth groups
        detected: Detected groups (singletons included)
        assignment: "best" matches every detected group to its best truth
            group; "optimal" matches one-to-one and unmatched detected groups
            score 0

    Returns:
        Mean F1 in [0, 1]; 0 when nothing was detected
    """
    if not detected or not truth:
        return 0.0
    scores = np.array([[f1_pair(t, d) for t in truth] for d in detected])
    if assignment == Assignment.OPTIMAL:
        rows, cols = linear_sum_assignment(scores, maximize=True)
        return float(scores[rows, cols].sum() / len(detected))
    return float(scores.max(axis=1).mean())


def evaluate(
    result: GroupResult,
    truth: GroundTruth,
    scenario: str = "",
    assignment: Assignment = Assignment.BEST,
) -> EvalRow:
    """Score one detection; the modularity is the accepting stage's"""
    return EvalRow(
        scenario=scenario or truth.scenario,
        method=result.method.value,
        f1=f1_overall(truth.as_sets(), result.detected_sets(), assignment),
        modularity=result.accepting_modularity(),
        decision_path=result.decision_path.value,
    )


# ════════════════════════════════════════════════════════════════
# METHOD RUNS
# ════════════════════════════════════════════════════════════════


def run_method(
    method: Method,
    inputs: AnalysisInputs,
    config: Optional[PipelineConfig] = None,
) -> Tuple[GroupResult, Similarity]:
    """Detection result and per-pair mean similarity of one method"""
    config = config or PipelineConfig()
    if method == Method.MEETSENSE:
        similarity = {pair: (f.mean_value if f is not None else None) for pair, f in inputs.acoustic.items()}
        return detect_from_inputs(inputs, config), similarity
    series = baseline_similarity_matrix(method, inputs.traces, config)
    return baseline_detect_from_inputs(method, inputs, config, series), series_means(series)


def compare(
    inputs: AnalysisInputs,
    truth: GroundTruth,
    methods: Sequence[Method] = tuple(Method),
    config: Optional[PipelineConfig] = None,
    scenario: str = "",
) -> List[EvalRow]:
    """One evaluation row per method on the same features"""
    config = config or PipelineConfig()
    rows = []
    for method in methods:
        result, _ = run_method(method, inputs, config)
        row = evaluate(result, truth, scenario, config.evaluation.assignment)
        logger.info(f"{row.scenario} {row.method}: F1={row.f1:.4f} M={row.modularity:.4f}")
        rows.append(row)
    return rows


def split_pairs(similarity: Similarity, truth: GroundTruth) -> Tuple[List[float], List[float]]:
    """Defined similarities of same-group pairs and of all other pairs"""
    group_of = {m: k for k, g in enumerate(truth.groups) for m in g}
    same: List[float] = []
    cross: List[float] = []
    for (i, j), value in sorted(similarity.items()):
        if value is None:
            continue
        if i in group_of and group_of.get(i) == group_of.get(j):
            same.append(value)
        else:
            cross.append(value)
    return same, cross


# ════════════════════════════════════════════════════════════════
# NOISE SWEEP & SEPARATION
# ════════════════════════════════════════════════════════════════


def noise_sweep(
    scenario: Scenario,
    snr_grid: Sequence[Optional[float]],
    methods: Sequence[Method] = tuple(Method),
    config: Optional[PipelineConfig] = None,
) -> List[SweepPoint]:
    """
    Re-render the scenario at every SNR and score every method on it.

    Scans do not depend on the audio noise and are synthesized once.
    """
    config = config or PipelineConfig()
    truth = ground_truth(scenario)
    scans = scans_by_subject(synth_scans(scenario)) if scenario.access_points else None
    points: List[SweepPoint] = []
    for snr_db in snr_grid:
        inputs = extract_features(synth_audio(with_snr(scenario, snr_db)), scans, config)
        for method in methods:
            result, similarity = run_method(method, inputs, config)
            same, cross = split_pairs(similarity, truth)
            point = SweepPoint(
                snr_db=snr_db,
                method=method.value,
                f1=f1_overall(truth.as_sets(), result.detected_sets(), config.evaluation.assignment),
                same_group_mean=mean(same) if same else None,
                cross_group_mean=mean(cross) if cross else None,
            )
            logger.info(f"SNR {snr_db} dB {method.value}: F1={point.f1:.4f}")
            points.append(point)
    return points


def separation_report(similarities: Dict[str, Similarity], truth: GroundTruth) -> List[SeparationStats]:
    """Same-group vs cross-group similarity distributions per method"""
    report = []
    for method, similarity in sorted(similarities.items()):
        same, cross = split_pairs(similarity, truth)
        report.append(SeparationStats(method=method, same=same, cross=cross))
    return report


# ════════════════════════════════════════════════════════════════
# DETECTOR INTERNALS
# ════════════════════════════════════════════════════════════════


def weight_sweep_curve(result: GroupResult) -> List[Tuple[float, float]]:
    """(w, modularity) of the weighted stage ordered by w; empty when the stage did not run"""
    return sorted(result.weight_sweep)


def modularity_trace(inputs: AnalysisInputs, config: Optional[PipelineConfig] = None) -> List[MergeStep]:
    """Walktrap merge trace on the full acoustic graph (Type-1 vs Type-2 convergence)"""
    config = config or PipelineConfig()
    _, trace = walktrap(feature_graph(inputs, "acoustic"), config.community.walk_length)
    return trace


# ════════════════════════════════════════════════════════════════
# COST BENCHMARK
# ════════════════════════════════════════════════════════════════


def _feature_run(method: Method, traces: List[AudioTrace], config: PipelineConfig) -> Callable[[], object]:
    if method == Method.MEETSENSE:
        return lambda: acoustic_similarity_matrix(traces, config.audio)
    return lambda: baseline_similarity_matrix(method, traces, config)


def benchmark(
    traces: Sequence[AudioTrace],
    methods: Sequence[Method] = tuple(Method),
    repeats: int = 3,
    config: Optional[PipelineConfig] = None,
) -> List[BenchmarkRow]:
    """
    Wall time and peak traced memory of each method's acoustic features.

    Preprocessing is shared by all methods and runs once outside the
    measurement. Timing runs are untraced; one extra run measures memory.
    """
    config = config or PipelineConfig()
    prepared = [preprocess(t, config.audio) for t in traces]
    rows = []
    for method in methods:
        run = _feature_run(method, prepared, config)
        timings = []
        for _ in range(repeats):
            started = time.perf_counter()
            run()
            timings.append(time.perf_counter() - started)
        tracemalloc.start()
        try:
            run()
            _, peak = tracemalloc.get_traced_memory()
        finally:
            tracemalloc.stop()
        row = BenchmarkRow(method=method.value, repeats=repeats, wall_s=min(timings), peak_kib=peak / 1024.0)
        logger.info(f"Benchmark {row.method}: {row.wall_s:.3f} s, {row.peak_kib:.0f} KiB")
        rows.append(row)
    return rows
