"""
Pydantic model bundling everything the detectors consume
"""

from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from .audio_trace import AudioTrace
from .pair_series import PairFeatureSeries, ProximitySeries, RefinedFeature
from .scan_record import ScanRecord
from .graph import edge_key

Pair = Tuple[str, str]


class AnalysisInputs(BaseModel):
    """
    Aligned audio, scans and pairwise features of one analysis window

    Attributes:
        subjects: Every subject in the window (sorted)
        scanning: Subjects with scan data in the window
        window: Analysis window [t0, t1] in seconds
        traces: Preprocessed, drift-aligned traces cut to the window
        scans: Scan logs restricted to the window
        acoustic_series: Per-segment acoustic similarity per pair
        proximity_series: Per-bucket proximity similarity per scanning pair
        acoustic: Refined acoustic feature per pair (None = absent)
        proximity: Refined proximity feature per scanning pair (None = absent)
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    subjects: List[str]
    scanning: List[str] = Field(default_factory=list)
    window: Optional[Tuple[float, float]] = None
    traces: List[AudioTrace] = Field(default_factory=list)
    scans: Dict[str, List[ScanRecord]] = Field(default_factory=dict)
    acoustic_series: Dict[Pair, PairFeatureSeries] = Field(default_factory=dict)
    proximity_series: Dict[Pair, ProximitySeries] = Field(default_factory=dict)
    acoustic: Dict[Pair, Optional[RefinedFeature]] = Field(default_factory=dict)
    proximity: Dict[Pair, Optional[RefinedFeature]] = Field(default_factory=dict)

    @staticmethod
    def _mean(features: Dict[Pair, Optional[RefinedFeature]], i: str, j: str) -> Optional[float]:
        feature = features.get(edge_key(i, j))
        return feature.mean_value if feature is not None else None

    def acoustic_mean(self, i: str, j: str) -> Optional[float]:
        return self._mean(self.acoustic, i, j)

    def proximity_mean(self, i: str, j: str) -> Optional[float]:
        return self._mean(self.proximity, i, j)

    def trace(self, subject_id: str) -> AudioTrace:
        for trace in self.traces:
            if trace.subject_id == subject_id:
                return trace
        raise KeyError(subject_id)
