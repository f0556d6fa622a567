"""
Pydantic models for the pipeline configuration document
One JSON document carries every tunable default so a run is fully auditable
"""

from pathlib import Path
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

from constants import (
    CepstralPart,
    CommunityAlgorithm,
    SeparationTest,
    Assignment,
    DEFAULT_BAND_LOW_HZ,
    DEFAULT_BAND_HIGH_HZ,
    DEFAULT_FILTER_ORDER,
    DEFAULT_MAX_SHIFT_S,
    DEFAULT_MIN_OVERLAP_S,
    DEFAULT_SEGMENT_LEN_S,
    DEFAULT_CEPSTRUM_FLOOR_DB,
    DEFAULT_TIME_BUCKET_S,
    DEFAULT_MATCH_TOLERANCE_S,
    DEFAULT_DISTANCE_CAP_DB,
    DEFAULT_SIGNIFICANCE_ALPHA,
    DEFAULT_WALK_LENGTH,
    DEFAULT_DELTA_P1,
    DEFAULT_DELTA_P2,
    DEFAULT_DELTA_ALPHA,
    DEFAULT_DELTA_PAIR,
    DEFAULT_SINGLE_GROUP_FLOOR,
    DEFAULT_COHESION_TOLERANCE,
    DEFAULT_WINDOW_T_S,
    DEFAULT_WEIGHT_GRID,
    DEFAULT_TOP_N_FREQUENCIES,
    DEFAULT_FINGERPRINT_WINDOW_S,
    DEFAULT_FINGERPRINT_OVERLAP,
    DEFAULT_SNR_GRID_DB,
)


class AudioConfig(BaseModel):
    """Audio preprocessing, alignment and cepstral similarity"""

    band_low_hz: float = Field(default=DEFAULT_BAND_LOW_HZ, gt=0)
    band_high_hz: float = Field(default=DEFAULT_BAND_HIGH_HZ, gt=0)
    filter_order: int = Field(default=DEFAULT_FILTER_ORDER, ge=1, le=12)
    max_shift_s: float = Field(default=DEFAULT_MAX_SHIFT_S, gt=0)
    min_overlap_s: float = Field(default=DEFAULT_MIN_OVERLAP_S, gt=0)
    segment_len_s: float = Field(default=DEFAULT_SEGMENT_LEN_S, gt=0)
    floor_db: Optional[float] = Field(
        default=DEFAULT_CEPSTRUM_FLOOR_DB,
        gt=0,
        description="Log-spectrum floor below each segment's peak bin (null = no floor)",
    )
    cepstral_part: CepstralPart = CepstralPart.EVEN
    align: bool = Field(default=True, description="Estimate and remove clock drift")

    @model_validator(mode="after")
    def check_band(self):
        if self.band_low_hz >= self.band_high_hz:
            raise ValueError("band_low_hz must be below band_high_hz")
        return self


class ProximityConfig(BaseModel):
    """WiFi proximity front end"""

    time_bucket_s: float = Field(default=DEFAULT_TIME_BUCKET_S, gt=0)
    match_tolerance_s: float = Field(default=DEFAULT_MATCH_TOLERANCE_S, ge=0)
    distance_cap_db: float = Field(default=DEFAULT_DISTANCE_CAP_DB, gt=0)


class FeatureConfig(BaseModel):
    """Noise-cluster removal on pairwise series"""

    significance_alpha: float = Field(default=DEFAULT_SIGNIFICANCE_ALPHA, gt=0, lt=1)
    test: SeparationTest = SeparationTest.WELCH


class CommunityConfig(BaseModel):
    """Community detection"""

    algorithm: CommunityAlgorithm = CommunityAlgorithm.WALKTRAP
    walk_length: int = Field(default=DEFAULT_WALK_LENGTH, ge=1, le=50)
    seed: int = Field(default=0, ge=0, description="Louvain random state")


class DetectorConfig(BaseModel):
    """
    Thresholds and sweep grid of the group detector

    Attributes:
        delta_p1: Strong-proximity modularity threshold
        delta_p2: Weak-proximity modularity threshold
        delta_alpha: Acoustic modularity threshold
        delta_pair: Refined acoustic feature needed to accept a 2-member cluster
        single_group_floor: Mean intra-edge weight needed to accept one all-covering community
        cohesion_tolerance: Partitions with lower modularity are read as one community
        weight_grid: Audio weights w swept for the combined graph
        window_T_s: Analysis window length (s)
    """

    delta_p1: float = Field(default=DEFAULT_DELTA_P1, ge=0, le=1)
    delta_p2: float = Field(default=DEFAULT_DELTA_P2, ge=0, le=1)
    delta_alpha: float = Field(default=DEFAULT_DELTA_ALPHA, ge=-1, le=1)
    delta_pair: float = Field(default=DEFAULT_DELTA_PAIR, ge=-1, le=1)
    single_group_floor: float = Field(default=DEFAULT_SINGLE_GROUP_FLOOR, ge=0, le=1)
    cohesion_tolerance: float = Field(default=DEFAULT_COHESION_TOLERANCE, ge=0, le=1)
    weight_grid: List[float] = Field(default_factory=lambda: list(DEFAULT_WEIGHT_GRID))
    window_T_s: float = Field(default=DEFAULT_WINDOW_T_S, gt=0)

    @field_validator("weight_grid")
    @classmethod
    def validate_weight_grid(cls, v: List[float]) -> List[float]:
        """Grid inside [0, 1] and containing both endpoints"""
        grid = sorted(set(float(w) for w in v))
        if any(w < 0.0 or w > 1.0 for w in grid):
            raise ValueError("weight_grid values must lie in [0, 1]")
        if grid[0] != 0.0 or grid[-1] != 1.0:
            raise ValueError("weight_grid must contain 0 and 1")
        return grid

    @model_validator(mode="after")
    def check_thresholds(self):
        if not self.delta_p2 < self.delta_p1:
            raise ValueError(
                f"delta_p2 ({self.delta_p2}) must be below delta_p1 ({self.delta_p1})"
            )
        if self.cohesion_tolerance > self.delta_p2:
            raise ValueError(
                f"cohesion_tolerance ({self.cohesion_tolerance}) must not exceed delta_p2 ({self.delta_p2})"
            )
        return self


class BaselineConfig(BaseModel):
    """Next2Me and AudioMatch parameters"""

    top_n: int = Field(default=DEFAULT_TOP_N_FREQUENCIES, ge=1)
    next2me_window_s: float = Field(default=DEFAULT_SEGMENT_LEN_S, gt=0)
    fingerprint_window_s: float = Field(default=DEFAULT_FINGERPRINT_WINDOW_S, gt=0)
    fingerprint_overlap: float = Field(default=DEFAULT_FINGERPRINT_OVERLAP, ge=0, lt=1)
    comparison_window_s: float = Field(default=DEFAULT_SEGMENT_LEN_S, gt=0)
    restrict_to_band: bool = Field(
        default=True, description="Fingerprint only STFT rows inside the audio band"
    )


class EvalConfig(BaseModel):
    """Scoring and sweeps"""

    assignment: Assignment = Assignment.BEST
    snr_grid_db: List[float] = Field(default_factory=lambda: list(DEFAULT_SNR_GRID_DB))


class PipelineConfig(BaseModel):
    """Complete run configuration"""

    audio: AudioConfig = Field(default_factory=AudioConfig)
    proximity: ProximityConfig = Field(default_factory=ProximityConfig)
    features: FeatureConfig = Field(default_factory=FeatureConfig)
    community: CommunityConfig = Field(default_factory=CommunityConfig)
    detector: DetectorConfig = Field(default_factory=DetectorConfig)
    baselines: BaselineConfig = Field(default_factory=BaselineConfig)
    evaluation: EvalConfig = Field(default_factory=EvalConfig)

    @classmethod
    def load(cls, path: Path) -> "PipelineConfig":
        """Reads a JSON config document; missing sections keep their defaults"""
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))

    def dump(self, path: Path) -> None:
        Path(path).write_text(self.model_dump_json(indent=2) + "\n", encoding="utf-8")

    def band(self) -> Tuple[float, float]:
        return (self.audio.band_low_hz, self.audio.band_high_hz)
