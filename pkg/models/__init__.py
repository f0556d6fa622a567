"""
Pydantic models for type safety and validation
"""

from .audio_trace import AudioTrace, CepstrumSegment, DriftEstimate
from .scan_record import ScanRecord
from .pair_series import (
    PairFeatureSeries,
    ProximitySeries,
    FingerprintSeries,
    RefinedFeature,
)
from .graph import SimilarityGraph, Partition, MergeStep, edge_key, canonical_assignment
from .pipeline_config import (
    AudioConfig,
    ProximityConfig,
    FeatureConfig,
    CommunityConfig,
    DetectorConfig,
    BaselineConfig,
    EvalConfig,
    PipelineConfig,
)
from .group_result import GroupResult, StageRecord
from .analysis_inputs import AnalysisInputs
from .scenario import (
    Scenario,
    SubjectSpec,
    GroupSpec,
    Turn,
    Waypoint,
    NoiseSpec,
    AccessPointSpec,
    DutyCycle,
    GroundTruth,
)
from .eval_report import EvalRow, EvalReport, SweepPoint, SeparationStats, BenchmarkRow
from .run_manifest import RunManifest

__all__ = [
    # Audio
    "AudioTrace",
    "CepstrumSegment",
    "DriftEstimate",
    # Proximity
    "ScanRecord",
    # Pair features
    "PairFeatureSeries",
    "ProximitySeries",
    "FingerprintSeries",
    "RefinedFeature",
    # Graphs
    "SimilarityGraph",
    "Partition",
    "MergeStep",
    "edge_key",
    "canonical_assignment",
    # Configuration
    "AudioConfig",
    "ProximityConfig",
    "FeatureConfig",
    "CommunityConfig",
    "DetectorConfig",
    "BaselineConfig",
    "EvalConfig",
    "PipelineConfig",
    # Detection
    "GroupResult",
    "StageRecord",
    "AnalysisInputs",
    # Simulator
    "Scenario",
    "SubjectSpec",
    "GroupSpec",
    "Turn",
    "Waypoint",
    "NoiseSpec",
    "AccessPointSpec",
    "DutyCycle",
    "GroundTruth",
    # Evaluation & runs
    "EvalRow",
    "EvalReport",
    "SweepPoint",
    "SeparationStats",
    "BenchmarkRow",
    "RunManifest",
]
