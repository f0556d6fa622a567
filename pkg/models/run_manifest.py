"""
Pydantic model for reproducible-run manifests
"""

from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import BaseModel, Field


class RunManifest(BaseModel):
    """
    Everything needed to replay a run

    Attributes:
        command: CLI subcommand
        config: Snapshot of the pipeline config document
        input_hashes: Relative path -> SHA-256 of every input file
        seed: Seed that drove all randomness
        tool_version: meetsense version
        created_at: UTC timestamp (ignored when comparing runs)
    """

    command: str
    config: Dict[str, Any] = Field(default_factory=dict)
    input_hashes: Dict[str, str] = Field(default_factory=dict)
    seed: Optional[int] = None
    tool_version: str
    created_at: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))

    @classmethod
    def load(cls, path: Path) -> "RunManifest":
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))

    def dump(self, path: Path) -> None:
        Path(path).write_text(self.model_dump_json(indent=2) + "\n", encoding="utf-8")

    def fingerprint(self) -> Dict[str, Any]:
        """Manifest content without the timestamp"""
        return self.model_dump(exclude={"created_at"}, mode="json")
