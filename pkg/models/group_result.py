"""
Pydantic model for detector output
"""

from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

from constants import Branch, DecisionPath, Method

# Stage whose modularity is reported for each outcome
DECIDING_STAGE: Dict[DecisionPath, str] = {
    DecisionPath.PROXIMITY_AUDIO: "proximity",
    DecisionPath.WEIGHTED_COMBINED: "weighted",
    DecisionPath.AUDIO_ONLY: "audio-only",
}


class StageRecord(BaseModel):
    """
    One detection stage as it was evaluated

    Attributes:
        stage: Stage name ("proximity", "audio", "weighted", "audio-only")
        members: Subjects the stage ran on
        modularity: Modularity of the stage's partition
        accepted: Whether the stage's gate passed
        best_w: Winning audio weight (weighted stage only)
        note: Short reason ("pair rule", "single-group floor", ...)
    """

    stage: str
    members: List[str]
    modularity: float
    accepted: bool
    best_w: Optional[float] = None
    note: str = ""


class GroupResult(BaseModel):
    """
    Detected partition of one analysis window

    Attributes:
        groups: Accepted meeting groups (each sorted, size >= 2)
        ungrouped: Subjects left as singletons
        modularities: Modularity per stage name
        decision_path: Branch family that produced the groups
        branch: Scenario label of the deciding branch
        stages: Ordered stage records
        weight_sweep: (w, modularity) for every swept weight
        window: Analysis window [t0, t1] in seconds
        method: Method that produced the result
        deciding_stage: Stage whose modularity is reported (None = by decision path)
    """

    groups: List[List[str]] = Field(default_factory=list)
    ungrouped: List[str] = Field(default_factory=list)
    modularities: Dict[str, float] = Field(default_factory=dict)
    decision_path: DecisionPath = DecisionPath.REJECTED
    branch: Branch = Branch.AUDIO_INSIGNIFICANCE
    stages: List[StageRecord] = Field(default_factory=list)
    weight_sweep: List[Tuple[float, float]] = Field(default_factory=list)
    window: Optional[Tuple[float, float]] = None
    method: Method = Method.MEETSENSE
    deciding_stage: Optional[str] = None

    @field_validator("groups")
    @classmethod
    def sort_groups(cls, v: List[List[str]]) -> List[List[str]]:
        return sorted((sorted(g) for g in v if g), key=lambda g: g[0])

    @field_validator("ungrouped")
    @classmethod
    def sort_ungrouped(cls, v: List[str]) -> List[str]:
        return sorted(v)

    @model_validator(mode="after")
    def check_disjoint(self):
        """No subject appears twice"""
        seen = set()
        for member in [m for g in self.groups for m in g] + self.ungrouped:
            if member in seen:
                raise ValueError(f"subject {member} appears in two groups")
            seen.add(member)
        return self

    @property
    def accepted(self) -> bool:
        return self.decision_path != DecisionPath.REJECTED

    def members(self) -> List[str]:
        return sorted([m for g in self.groups for m in g] + self.ungrouped)

    def detected_sets(self) -> List[set]:
        """Groups plus singletons, as scored by the F1 metric"""
        return [set(g) for g in self.groups] + [{u} for u in self.ungrouped]

    def accepting_modularity(self) -> float:
        """Modularity of the stage that decided the outcome"""
        stage = self.deciding_stage or DECIDING_STAGE.get(self.decision_path)
        if stage is not None and stage in self.modularities:
            return self.modularities[stage]
        return self.stages[-1].modularity if self.stages else 0.0

    def to_json_dict(self) -> Dict[str, Any]:
        """Output document of the detect command"""
        return {
            "window": list(self.window) if self.window else None,
            "method": self.method.value,
            "groups": self.groups,
            "ungrouped": self.ungrouped,
            "decision_path": self.decision_path.value,
            "deciding_stage": self.deciding_stage,
            "branch": self.branch.value,
            "modularities": {k: round(v, 6) for k, v in sorted(self.modularities.items())},
            "stages": [s.model_dump() for s in self.stages],
            "weight_sweep": [[w, round(m, 6)] for w, m in self.weight_sweep],
        }
