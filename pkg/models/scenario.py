"""
Pydantic models for simulator scenarios and ground truth
"""

from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

from constants import (
    DEFAULT_SAMPLE_RATE_HZ,
    DEFAULT_SCAN_INTERVAL_S,
    DEFAULT_RSSI_SIGMA_DB,
    DEFAULT_TX_POWER_DBM,
    DEFAULT_PATH_LOSS_EXPONENT,
    DEFAULT_SIM_SEED,
)


class Waypoint(BaseModel):
    """Position of a moving subject at time t (s)"""

    t: float = Field(..., ge=0)
    x: float
    y: float


class SubjectSpec(BaseModel):
    """
    One simulated subject and its phone

    Attributes:
        id: Subject identifier
        position: Static position (m); ignored while a trajectory is set
        device_gain: Linear microphone gain (AGC heterogeneity)
        clock_offset_s: Device clock error; positive means the recording lags
        fundamental_hz: Voice pitch when the subject speaks (None = drawn from the seed)
        trajectory: Piecewise-linear walk, sorted by t
    """

    id: str = Field(..., min_length=1)
    position: Tuple[float, float] = (0.0, 0.0)
    device_gain: float = Field(default=1.0, gt=0)
    clock_offset_s: float = 0.0
    fundamental_hz: Optional[float] = Field(default=None, ge=50, le=500)
    trajectory: List[Waypoint] = Field(default_factory=list)

    @field_validator("trajectory")
    @classmethod
    def sort_trajectory(cls, v: List[Waypoint]) -> List[Waypoint]:
        return sorted(v, key=lambda w: w.t)


class Turn(BaseModel):
    """One speaking turn"""

    speaker_id: str
    start_s: float = Field(..., ge=0)
    end_s: float

    @field_validator("end_s")
    @classmethod
    def validate_end_after_start(cls, v: float, info) -> float:
        start = info.data.get("start_s")
        if start is not None and v <= start:
            raise ValueError(f"turn end ({v}) must be after start ({start})")
        return v


class GroupSpec(BaseModel):
    """
    A meeting group and who talks when

    Attributes:
        members: Member subject ids
        schedule: Speaking turns (speakers are members)
        harmonic_rolloff_db: Spectral rolloff of the voices, dB per octave
    """

    members: List[str] = Field(..., min_length=1)
    schedule: List[Turn] = Field(default_factory=list)
    harmonic_rolloff_db: float = Field(default=6.0, ge=0)


class NoiseSpec(BaseModel):
    """Ambient noise; snr_db None means noiseless"""

    snr_db: Optional[float] = 20.0


class AccessPointSpec(BaseModel):
    """WiFi access point for the log-distance RSSI model"""

    id: str
    position: Tuple[float, float]
    tx_power_dbm: float = DEFAULT_TX_POWER_DBM
    path_loss_exponent: float = Field(default=DEFAULT_PATH_LOSS_EXPONENT, gt=0)


class DutyCycle(BaseModel):
    """Recording on/off pattern (field app: 1 min on, 3 min off)"""

    on_s: float = Field(default=60.0, gt=0)
    off_s: float = Field(default=180.0, ge=0)


class Scenario(BaseModel):
    """
    Complete simulator input; the seed fully determines the output

    Attributes:
        name: Scenario label
        duration_s: Recording length
        subjects: Subjects with positions, gains, clock offsets
        groups: Meeting groups and speaker schedules
        noise: Ambient noise level
        access_points: WiFi access points
        rssi_sigma_db: Shadowing noise of RSSI readings
        scan_interval_s: WiFi scan cadence
        scan_subjects: Subjects that log scans (None = all)
        duty_cycle: Optional recording gaps
        sample_rate_hz: Audio sampling rate
        start_time: Nominal start of the recording (s)
        seed: Random seed
    """

    name: str = "custom"
    description: str = ""
    duration_s: float = Field(..., gt=0)
    subjects: List[SubjectSpec] = Field(..., min_length=1)
    groups: List[GroupSpec] = Field(default_factory=list)
    noise: NoiseSpec = Field(default_factory=NoiseSpec)
    access_points: List[AccessPointSpec] = Field(default_factory=list)
    rssi_sigma_db: float = Field(default=DEFAULT_RSSI_SIGMA_DB, ge=0)
    scan_interval_s: float = Field(default=DEFAULT_SCAN_INTERVAL_S, gt=0)
    scan_subjects: Optional[List[str]] = None
    duty_cycle: Optional[DutyCycle] = None
    sample_rate_hz: int = Field(default=DEFAULT_SAMPLE_RATE_HZ, gt=0)
    start_time: float = 0.0
    seed: int = Field(default=DEFAULT_SIM_SEED, ge=0)

    @model_validator(mode="after")
    def check_ids(self):
        """Subject ids unique; group members known"""
        ids = [s.id for s in self.subjects]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate subject ids")
        known = set(ids)
        for group in self.groups:
            unknown = set(group.members) - known
            if unknown:
                raise ValueError(f"group references unknown subjects {sorted(unknown)}")
        return self

    def subject(self, subject_id: str) -> SubjectSpec:
        for subject in self.subjects:
            if subject.id == subject_id:
                return subject
        raise KeyError(subject_id)

    def subject_ids(self) -> List[str]:
        return [s.id for s in self.subjects]


class GroundTruth(BaseModel):
    """Meeting groups as reported by the participants"""

    scenario: str = ""
    window: Tuple[float, float]
    groups: List[List[str]]

    @field_validator("groups")
    @classmethod
    def sort_groups(cls, v: List[List[str]]) -> List[List[str]]:
        return sorted((sorted(g) for g in v if g), key=lambda g: g[0])

    def as_sets(self) -> List[set]:
        return [set(g) for g in self.groups]
