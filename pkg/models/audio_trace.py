"""
Pydantic models for recorded audio and its cepstral segments
"""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from constants import DEFAULT_SAMPLE_RATE_HZ


class AudioTrace(BaseModel):
    """
    One subject's waveform with its timebase

    Attributes:
        subject_id: Subject / device identifier
        sample_rate_hz: Sampling rate in Hz
        start_time: Device-clock time of the first sample (seconds since epoch)
        samples: Mono amplitudes as float64
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    subject_id: str = Field(..., min_length=1, description="Subject identifier")
    sample_rate_hz: int = Field(
        default=DEFAULT_SAMPLE_RATE_HZ, gt=0, description="Sampling rate (Hz)"
    )
    start_time: float = Field(default=0.0, description="Start time (s)")
    samples: np.ndarray = Field(..., description="Mono samples")

    @field_validator("samples", mode="before")
    @classmethod
    def validate_samples(cls, v) -> np.ndarray:
        """Coerces to a non-empty 1-D float64 array"""
        arr = np.asarray(v, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError(f"samples must be 1-D, got shape {arr.shape}")
        if arr.size == 0:
            raise ValueError("samples must not be empty")
        return arr

    @property
    def n_samples(self) -> int:
        return int(self.samples.size)

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate_hz

    @property
    def end_time(self) -> float:
        return self.start_time + self.duration_s

    def replace(self, samples: np.ndarray, start_time: float = None) -> "AudioTrace":
        """Copy with new samples (and optionally a new start time)"""
        return AudioTrace(
            subject_id=self.subject_id,
            sample_rate_hz=self.sample_rate_hz,
            start_time=self.start_time if start_time is None else start_time,
            samples=samples,
        )


class CepstrumSegment(BaseModel):
    """
    Cepstral coefficients of one fixed-length segment

    Attributes:
        subject_id: Owner of the source trace
        segment_index: Segment number in segment_len_s units from the trace start
        coefficients: Real quefrency-domain values, one per source sample
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    subject_id: str = Field(..., min_length=1)
    segment_index: int = Field(..., ge=0)
    coefficients: np.ndarray


class DriftEstimate(BaseModel):
    """
    Clock drift of a target trace relative to a reference trace

    Attributes:
        reference_id: Reference subject
        target_id: Target subject
        shift_s: Seconds the target is shifted forward (positive = target late)
        peak_correlation: Normalized cross-correlation at the chosen shift
    """

    reference_id: str
    target_id: str
    shift_s: float
    peak_correlation: float = Field(..., ge=-1.0, le=1.0)

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "reference_id": "U1",
                "target_id": "U2",
                "shift_s": 11.8209,
                "peak_correlation": 0.83,
            }
        }
    )
