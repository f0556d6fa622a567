"""
Pydantic model for WiFi scans
"""

from typing import Dict

from pydantic import BaseModel, Field, field_validator

from constants import RSSI_CUTOFF_DBM


class ScanRecord(BaseModel):
    """
    One WiFi scan of one subject

    Attributes:
        subject_id: Scanning subject
        timestamp_s: Scan time (s)
        readings: Access point id (BSSID) -> RSSI in dBm; weak readings dropped
    """

    subject_id: str = Field(..., min_length=1)
    timestamp_s: float
    readings: Dict[str, float] = Field(default_factory=dict)

    @field_validator("readings")
    @classmethod
    def drop_weak_readings(cls, v: Dict[str, float]) -> Dict[str, float]:
        """Readings below the connectivity cutoff are absent"""
        return {ap: float(rssi) for ap, rssi in v.items() if rssi >= RSSI_CUTOFF_DBM}

    class Config:
        json_schema_extra = {
            "example": {
                "subject_id": "U1",
                "timestamp_s": 60.0,
                "readings": {"ap:01": -52.0, "ap:02": -67.5},
            }
        }
