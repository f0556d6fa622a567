"""
Meeting-group detector
Splits the population by proximity availability, gates community structure
on modularity thresholds and falls back to a weighted proximity/audio graph
when proximity alone is ambiguous
"""

import logging
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from audio import acoustic_similarity_matrix, align, is_silent, preprocess, window
from communities import build_graph, detect_communities
from constants import Branch, DecisionPath, MODULARITY_TIE_TOLERANCE
from errors import AlignmentError, InsufficientPopulationError, ParameterError
from features import refine_pairs
from models import (
    AnalysisInputs,
    AudioTrace,
    GroupResult,
    Partition,
    PipelineConfig,
    ScanRecord,
    SimilarityGraph,
    StageRecord,
)
from proximity import proximity_similarity_matrix

logger = logging.getLogger(__name__)

ScanLogs = Dict[str, List[ScanRecord]]
MeanLookup = Callable[[str, str], Optional[float]]


# ════════════════════════════════════════════════════════════════
# FEATURE EXTRACTION
# ════════════════════════════════════════════════════════════════


def _common_span(traces: List[AudioTrace], t0: float, t1: float) -> List[AudioTrace]:
    """Cut every trace to [t0, t1) and to a shared length"""
    cut = [window(t, t0, t1) for t in traces]
    length = min(t.n_samples for t in cut)
    return [t.replace(t.samples[:length], start_time=t0) for t in cut]


def extract_features(
    traces: Sequence[AudioTrace],
    scans: Optional[ScanLogs] = None,
    config: Optional[PipelineConfig] = None,
) -> AnalysisInputs:
    """
    Preprocess, align and window the audio, then compute and refine every
    pairwise acoustic and proximity feature.

    Args:
        traces: One trace per subject
        scans: Optional scan logs per subject
        config: Pipeline configuration

    Returns:
        AnalysisInputs for the analysis window

    Raises:
        InsufficientPopulationError: Fewer than two subjects
        AlignmentError: Traces cannot be aligned
    """
    config = config or PipelineConfig()
    traces = sorted(traces, key=lambda t: t.subject_id)
    subjects = [t.subject_id for t in traces]
    if len(subjects) < 2:
        raise InsufficientPopulationError(f"group detection needs at least two subjects, got {len(subjects)}")
    if len(set(subjects)) != len(subjects):
        raise InsufficientPopulationError("duplicate subject ids among traces")

    processed = [preprocess(t, config.audio) for t in traces]
    if config.audio.align:
        reference = next((t.subject_id for t in processed if not is_silent(t.samples)), subjects[0])
        processed = align(processed, reference, config.audio.max_shift_s, config.audio.min_overlap_s)

    t0 = max(t.start_time for t in processed)
    t1 = min(t.end_time for t in processed)
    if t1 <= t0:
        raise AlignmentError("traces share no common span")
    if t1 - t0 < config.detector.window_T_s:
        logger.warning(
            f"Audio covers {t1 - t0:.1f} s, shorter than the {config.detector.window_T_s:.0f} s analysis window"
        )
    t1 = min(t1, t0 + config.detector.window_T_s)
    windowed = _common_span(processed, t0, t1)

    acoustic_series = acoustic_similarity_matrix(windowed, config.audio)
    acoustic = refine_pairs(acoustic_series, config.features)

    tolerance = config.proximity.match_tolerance_s
    in_window: ScanLogs = {}
    for subject_id, log in (scans or {}).items():
        if subject_id not in subjects:
            continue
        kept = [s for s in log if t0 - tolerance <= s.timestamp_s <= t1 + tolerance]
        if kept:
            in_window[subject_id] = kept
    proximity_series = proximity_similarity_matrix(in_window, config.proximity)
    proximity = refine_pairs(proximity_series, config.features)

    logger.info(
        f"Features for {len(subjects)} subjects over [{t0:.2f}, {t1:.2f}] s "
        f"({len(in_window)} with scans)"
    )
    return AnalysisInputs(
        subjects=subjects,
        scanning=sorted(in_window),
        window=(t0, t1),
        traces=windowed,
        scans=in_window,
        acoustic_series=acoustic_series,
        proximity_series=proximity_series,
        acoustic=acoustic,
        proximity=proximity,
    )


# ════════════════════════════════════════════════════════════════
# GRAPH HELPERS
# ════════════════════════════════════════════════════════════════


def _graph(members: Sequence[str], mean: MeanLookup) -> SimilarityGraph:
    """Complete graph whose weights are refined means (absent = 0)"""
    weights = {}
    for a, i in enumerate(members):
        for j in members[a + 1:]:
            value = mean(i, j)
            weights[(i, j)] = value if value is not None else 0.0
    return build_graph(list(members), weights)


def _combined_graph(members: Sequence[str], inputs: AnalysisInputs, w: float) -> SimilarityGraph:
    def _mean(i: str, j: str) -> float:
        proximity = inputs.proximity_mean(i, j) or 0.0
        acoustic = inputs.acoustic_mean(i, j) or 0.0
        return (1.0 - w) * proximity + w * acoustic

    return _graph(members, _mean)


def feature_graph(inputs: AnalysisInputs, kind: str = "acoustic") -> SimilarityGraph:
    """
    Complete graph of one refined feature kind: "acoustic" spans every
    subject, "proximity" only the scanning ones.

    Raises:
        ParameterError: Unknown kind
    """
    if kind == "acoustic":
        return _graph(inputs.subjects, inputs.acoustic_mean)
    if kind == "proximity":
        return _graph(inputs.scanning, inputs.proximity_mean)
    raise ParameterError(f"unknown feature kind {kind!r}; use acoustic or proximity")


def find_communities(graph: SimilarityGraph, config: Optional[PipelineConfig] = None) -> Partition:
    """
    Detected communities; a split weaker than the cohesion tolerance is read
    as one community with modularity 0 (Type-2 convergence).
    """
    config = config or PipelineConfig()
    partition = detect_communities(
        graph,
        config.community.algorithm,
        config.community.walk_length,
        config.community.seed,
    )
    if partition.n_communities > 1 and partition.modularity < config.detector.cohesion_tolerance:
        logger.debug(f"Split with M={partition.modularity:.4f} collapsed into one community")
        return Partition(assignment={node: 0 for node in graph.nodes}, modularity=0.0)
    return partition


def _gate(
    partition: Partition,
    graph: SimilarityGraph,
    config: PipelineConfig,
) -> Tuple[bool, List[List[str]], str]:
    """
    Acceptance of one detection: modularity above delta_alpha, or a single
    all-covering community whose mean edge weight clears the floor.

    Returns:
        (accepted, groups of size >= 2, note)
    """
    detector = config.detector
    if partition.n_communities == 1:
        accepted = graph.mean_weight() > detector.single_group_floor
        return accepted, ([list(graph.nodes)] if accepted else []), "single-group floor"
    accepted = partition.modularity >= detector.delta_alpha
    groups = [c for c in partition.communities() if len(c) >= 2] if accepted else []
    return accepted, groups, ""


def _confirm_cluster(
    members: List[str],
    inputs: AnalysisInputs,
    config: PipelineConfig,
    stage: str,
) -> Tuple[List[List[str]], Optional[StageRecord]]:
    """
    Confirm one candidate cluster on its acoustic graph.

    Pairs skip community detection and need a refined acoustic feature of at
    least delta_pair. A lone subject is returned without a verdict.
    """
    if len(members) == 1:
        return [], None
    if len(members) == 2:
        similarity = inputs.acoustic_mean(*members)
        accepted = similarity is not None and similarity >= config.detector.delta_pair
        record = StageRecord(stage=stage, members=members, modularity=0.0, accepted=accepted, note="pair rule")
        return ([list(members)] if accepted else []), record

    graph = _graph(members, inputs.acoustic_mean)
    partition = find_communities(graph, config)
    accepted, groups, note = _gate(partition, graph, config)
    record = StageRecord(
        stage=stage,
        members=members,
        modularity=partition.modularity,
        accepted=accepted,
        note=note,
    )
    logger.info(
        f"Audio stage on {members}: M={partition.modularity:.4f}, "
        f"{partition.n_communities} communities, {'accepted' if accepted else 'rejected'}"
    )
    return groups, record


def _result(
    members: Sequence[str],
    groups: List[List[str]],
    decision_path: DecisionPath,
    branch: Branch,
    stages: List[StageRecord],
    modularities: Dict[str, float],
    weight_sweep: Optional[List[Tuple[float, float]]] = None,
    deciding_stage: Optional[str] = None,
) -> GroupResult:
    grouped = {m for g in groups for m in g}
    if not groups:
        decision_path = DecisionPath.REJECTED
    return GroupResult(
        groups=groups,
        ungrouped=[m for m in members if m not in grouped],
        modularities=modularities,
        decision_path=decision_path,
        branch=branch,
        stages=stages,
        weight_sweep=weight_sweep or [],
        deciding_stage=deciding_stage if groups else None,
    )


# ════════════════════════════════════════════════════════════════
# PROXIMITY AVAILABLE
# ════════════════════════════════════════════════════════════════


def _confirm_clusters(
    clusters: List[List[str]],
    members: List[str],
    inputs: AnalysisInputs,
    config: PipelineConfig,
    stages: List[StageRecord],
    modularities: Dict[str, float],
    deciding_stage: str,
) -> GroupResult:
    groups: List[List[str]] = []
    verdicts: List[bool] = []
    gated: List[float] = []
    for cluster in clusters:
        found, record = _confirm_cluster(cluster, inputs, config, "audio")
        groups.extend(found)
        if record is None:
            continue
        stages.append(record)
        verdicts.append(record.accepted)
        if len(cluster) >= 3:
            gated.append(record.modularity)
    if gated:
        modularities["audio"] = min(gated)

    branch = (
        Branch.PROXIMITY_AUDIO_INFLUENCE
        if verdicts and all(verdicts)
        else Branch.PROXIMITY_INFLUENCE_AUDIO_INSIGNIFICANCE
    )
    return _result(members, groups, DecisionPath.PROXIMITY_AUDIO, branch, stages, modularities,
                   deciding_stage=deciding_stage)


def _weighted(
    members: List[str],
    inputs: AnalysisInputs,
    config: PipelineConfig,
    stages: List[StageRecord],
    modularities: Dict[str, float],
) -> GroupResult:
    """Sweep the audio weight and keep the max-modularity partition (ties: lowest w)"""
    sweep: List[Tuple[float, float]] = []
    best: Optional[Tuple[float, Partition, SimilarityGraph]] = None
    for w in config.detector.weight_grid:
        graph = _combined_graph(members, inputs, w)
        partition = find_communities(graph, config)
        sweep.append((w, partition.modularity))
        logger.debug(f"Weighted graph w={w:.2f}: M={partition.modularity:.4f}")
        if best is None or partition.modularity > best[1].modularity + MODULARITY_TIE_TOLERANCE:
            best = (w, partition, graph)

    best_w, partition, graph = best
    accepted, groups, note = _gate(partition, graph, config)
    modularities["weighted"] = partition.modularity
    stages.append(StageRecord(
        stage="weighted",
        members=members,
        modularity=partition.modularity,
        accepted=accepted,
        best_w=best_w,
        note=note,
    ))
    logger.info(f"Weighted stage: best w={best_w:.2f}, M={partition.modularity:.4f}")
    branch = (
        Branch.PROXIMITY_CONFUSED_AUDIO_INFLUENCE
        if accepted
        else Branch.PROXIMITY_CONFUSED_AUDIO_INSIGNIFICANCE
    )
    return _result(members, groups, DecisionPath.WEIGHTED_COMBINED, branch, stages, modularities,
                   weight_sweep=sweep, deciding_stage="weighted")


def proximity_available(
    subjects: Sequence[str],
    inputs: AnalysisInputs,
    config: Optional[PipelineConfig] = None,
) -> GroupResult:
    """
    Detection for subjects with both proximity and audio.

    Step 1 finds clusters on the proximity graph. A strong partition
    (M_p >= delta_p1), or a single cohesive community, is confirmed cluster by
    cluster on the acoustic graph. A moderate one (delta_p2 <= M_p < delta_p1)
    is replaced by the best partition of the weighted proximity/audio graph.
    Anything weaker is rejected.

    Returns:
        GroupResult; rejection is reported through decision_path
    """
    config = config or PipelineConfig()
    detector = config.detector
    members = sorted(subjects)
    if len(members) < 2:
        raise InsufficientPopulationError("proximity stage needs at least two subjects")

    graph = _graph(members, inputs.proximity_mean)
    partition = find_communities(graph, config)
    m_p = partition.modularity
    modularities = {"proximity": m_p}
    cohesive = partition.n_communities == 1 and graph.mean_weight() > detector.single_group_floor
    logger.info(f"Proximity stage: M_p={m_p:.4f}, {partition.n_communities} communities")

    if cohesive or m_p >= detector.delta_p1:
        stages = [StageRecord(
            stage="proximity",
            members=members,
            modularity=m_p,
            accepted=True,
            note="single-group floor" if cohesive else Branch.PROXIMITY_DOMINATING.value,
        )]
        return _confirm_clusters(
            partition.communities(),
            members,
            inputs,
            config,
            stages,
            modularities,
            deciding_stage="audio" if cohesive else "proximity",
        )

    if m_p >= detector.delta_p2:
        stages = [StageRecord(stage="proximity", members=members, modularity=m_p, accepted=False,
                              note="between thresholds")]
        return _weighted(members, inputs, config, stages, modularities)

    stages = [StageRecord(stage="proximity", members=members, modularity=m_p, accepted=False,
                          note=Branch.PROXIMITY_INSIGNIFICANCE.value)]
    return _result(members, [], DecisionPath.REJECTED, Branch.PROXIMITY_INSIGNIFICANCE, stages, modularities)


# ════════════════════════════════════════════════════════════════
# PROXIMITY NOT AVAILABLE
# ════════════════════════════════════════════════════════════════


def proximity_not_available(
    subjects: Sequence[str],
    inputs: AnalysisInputs,
    config: Optional[PipelineConfig] = None,
) -> GroupResult:
    """Detection on the acoustic graph alone"""
    config = config or PipelineConfig()
    members = sorted(subjects)
    if len(members) < 2:
        raise InsufficientPopulationError("audio-only stage needs at least two subjects")

    groups, record = _confirm_cluster(members, inputs, config, "audio-only")
    accepted = bool(groups)
    branch = Branch.AUDIO_INFLUENCE if accepted else Branch.AUDIO_INSIGNIFICANCE
    return _result(
        members,
        groups,
        DecisionPath.AUDIO_ONLY,
        branch,
        [record],
        {"audio-only": record.modularity},
        deciding_stage="audio-only",
    )


# ════════════════════════════════════════════════════════════════
# ENTRY POINTS
# ════════════════════════════════════════════════════════════════


def _merge(results: List[GroupResult], window: Optional[Tuple[float, float]]) -> GroupResult:
    """Union of the per-population results; the first accepted one names the outcome"""
    deciding = next((r for r in results if r.accepted), results[0])
    modularities: Dict[str, float] = {}
    for r in results:
        modularities.update(r.modularities)
    return GroupResult(
        groups=[g for r in results for g in r.groups],
        ungrouped=[u for r in results for u in r.ungrouped],
        modularities=modularities,
        decision_path=deciding.decision_path,
        branch=deciding.branch,
        stages=[s for r in results for s in r.stages],
        weight_sweep=[p for r in results for p in r.weight_sweep],
        window=window,
        deciding_stage=deciding.deciding_stage,
    )


def detect_from_inputs(inputs: AnalysisInputs, config: Optional[PipelineConfig] = None) -> GroupResult:
    """
    Route scanning subjects to the proximity stage and the rest to the
    audio-only stage, then merge both outcomes.

    A lone scanning subject cannot form a proximity graph and joins the
    audio-only population.
    """
    config = config or PipelineConfig()
    if len(inputs.subjects) < 2:
        raise InsufficientPopulationError("group detection needs at least two subjects")

    scanning = set(inputs.scanning)
    with_proximity = [s for s in inputs.subjects if s in scanning]
    without = [s for s in inputs.subjects if s not in scanning]
    if len(with_proximity) == 1:
        logger.info(f"Only {with_proximity[0]} has scans; treating it as proximity-unavailable")
        without = sorted(without + with_proximity)
        with_proximity = []

    results: List[GroupResult] = []
    if with_proximity:
        results.append(proximity_available(with_proximity, inputs, config))
    if len(without) >= 2:
        results.append(proximity_not_available(without, inputs, config))
    elif without:
        results.append(GroupResult(ungrouped=without))

    result = _merge(results, inputs.window)
    logger.info(
        f"Detected {len(result.groups)} groups via {result.decision_path.value} ({result.branch.value})"
    )
    return result


def detect(
    traces: Sequence[AudioTrace],
    scans: Optional[ScanLogs] = None,
    config: Optional[PipelineConfig] = None,
) -> GroupResult:
    """
    Detect meeting groups from per-subject audio and optional WiFi scans.

    Args:
        traces: One trace per subject
        scans: Scan logs of the subjects that have them
        config: Pipeline configuration

    Returns:
        GroupResult over all subjects

    Raises:
        InsufficientPopulationError: Fewer than two subjects
    """
    config = config or PipelineConfig()
    return detect_from_inputs(extract_features(traces, scans, config), config)
