"""
Pydantic models for pairwise feature series and their refined means
"""

from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from constants import Method


class PairFeatureSeries(BaseModel):
    """
    Time-indexed similarity values of one subject pair

    Attributes:
        subject_i: First subject
        subject_j: Second subject
        kind: Feature kind ("acoustic", "proximity", "next2me", "audiomatch")
        indices: Segment / bucket index per value
        values: Similarity per index; NaN marks an absent value
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    subject_i: str
    subject_j: str
    kind: str
    indices: np.ndarray
    values: np.ndarray

    @field_validator("indices", mode="before")
    @classmethod
    def coerce_indices(cls, v) -> np.ndarray:
        return np.asarray(v, dtype=np.int64).reshape(-1)

    @field_validator("values", mode="before")
    @classmethod
    def coerce_values(cls, v) -> np.ndarray:
        return np.asarray(v, dtype=np.float64).reshape(-1)

    @model_validator(mode="after")
    def check_lengths(self):
        if self.indices.size != self.values.size:
            raise ValueError(
                f"{self.indices.size} indices but {self.values.size} values"
            )
        return self

    @property
    def pair(self) -> Tuple[str, str]:
        return (self.subject_i, self.subject_j)

    def present(self) -> np.ndarray:
        """Defined values only"""
        return self.values[np.isfinite(self.values)]

    def present_count(self) -> int:
        return int(np.isfinite(self.values).sum())


class ProximitySeries(PairFeatureSeries):
    """Per-bucket proximity similarity, bounded to [0, 1]"""

    kind: str = "proximity"

    @field_validator("values")
    @classmethod
    def check_bounds(cls, v: np.ndarray) -> np.ndarray:
        finite = v[np.isfinite(v)]
        if finite.size and (finite.min() < 0.0 or finite.max() > 1.0):
            raise ValueError("proximity similarity must lie in [0, 1]")
        return v


class FingerprintSeries(PairFeatureSeries):
    """
    Per-window similarity of one audio baseline

    Attributes:
        method: Baseline that produced the series
        distances: AudioMatch only, mean Hamming distance per word (0-16 bits)
    """

    method: Method
    distances: Optional[np.ndarray] = None


class RefinedFeature(BaseModel):
    """
    Noise-refined mean of a pairwise series

    Attributes:
        subject_i / subject_j: The pair
        kind: Feature kind of the source series
        mean_value: Mean of the retained points
        used_count: Points retained after dropping the minor cluster
        total_count: Points in the series
        single_cluster: True when the series did not split significantly
    """

    subject_i: str = ""
    subject_j: str = ""
    kind: str = ""
    mean_value: float
    used_count: int = Field(..., gt=0)
    total_count: int = Field(..., gt=0)
    single_cluster: bool

    @model_validator(mode="after")
    def check_counts(self):
        if self.used_count > self.total_count:
            raise ValueError("used_count cannot exceed total_count")
        return self
