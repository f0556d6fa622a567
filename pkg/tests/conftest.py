"""
Shared fixtures: synthetic traces, hand-built feature inputs and small graphs
"""

from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pytest

from models import AnalysisInputs, AudioTrace, RefinedFeature, SimilarityGraph
from models.graph import edge_key

FS = 8000


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def make_trace():
    def _make(subject_id: str, samples, fs: int = FS, start_time: float = 0.0) -> AudioTrace:
        return AudioTrace(subject_id=subject_id, sample_rate_hz=fs, start_time=start_time, samples=samples)

    return _make


@pytest.fixture
def tone():
    """Sum of unit sines at the given frequencies"""

    def _tone(frequencies: Sequence[float], duration_s: float = 2.0, fs: int = FS) -> np.ndarray:
        t = np.arange(int(duration_s * fs)) / fs
        return sum(np.sin(2.0 * np.pi * f * t) for f in frequencies)

    return _tone


def _refined(value: Optional[float]) -> Optional[RefinedFeature]:
    if value is None:
        return None
    return RefinedFeature(mean_value=value, used_count=1, total_count=1, single_cluster=True)


def _pairwise(
    subjects: List[str],
    groups: Sequence[Sequence[str]],
    intra: Optional[float],
    cross: Optional[float],
) -> Dict[Tuple[str, str], Optional[RefinedFeature]]:
    group_of = {m: k for k, g in enumerate(groups) for m in g}
    features = {}
    for a, i in enumerate(subjects):
        for j in subjects[a + 1:]:
            same = i in group_of and group_of.get(i) == group_of.get(j)
            features[edge_key(i, j)] = _refined(intra if same else cross)
    return features


@pytest.fixture
def make_inputs():
    """
    AnalysisInputs with block-structured refined features.

    Pairs inside one of `groups` get the intra value, all others the cross
    value; None marks an absent feature.
    """

    def _make(
        subjects: Sequence[str],
        groups: Sequence[Sequence[str]],
        acoustic: Tuple[Optional[float], Optional[float]],
        proximity: Optional[Tuple[Optional[float], Optional[float]]] = None,
        scanning: Optional[Sequence[str]] = None,
        proximity_groups: Optional[Sequence[Sequence[str]]] = None,
    ) -> AnalysisInputs:
        subjects = sorted(subjects)
        if proximity is not None and scanning is None:
            scanning = subjects
        scanning = sorted(scanning or [])
        proximity_features = {}
        if proximity is not None:
            proximity_features = _pairwise(scanning, proximity_groups or groups, *proximity)
        return AnalysisInputs(
            subjects=subjects,
            scanning=scanning,
            window=(0.0, 900.0),
            acoustic=_pairwise(subjects, groups, *acoustic),
            proximity=proximity_features,
        )

    return _make


@pytest.fixture
def two_cliques() -> SimilarityGraph:
    """Two disconnected triangles of unit weight"""
    weights = {}
    for block in (["a", "b", "c"], ["d", "e", "f"]):
        for k, i in enumerate(block):
            for j in block[k + 1:]:
                weights[(i, j)] = 1.0
    return SimilarityGraph(nodes=list("abcdef"), weights=weights)


@pytest.fixture
def uniform_graph() -> SimilarityGraph:
    nodes = list("abcde")
    return SimilarityGraph(
        nodes=nodes,
        weights={(i, j): 0.7 for k, i in enumerate(nodes) for j in nodes[k + 1:]},
    )
