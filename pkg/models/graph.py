"""
Pydantic models for similarity graphs and their partitions
"""

from typing import Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


def edge_key(i: str, j: str) -> Tuple[str, str]:
    """Order-independent key of an undirected edge"""
    return (i, j) if i <= j else (j, i)


class SimilarityGraph(BaseModel):
    """
    Complete weighted graph over subjects

    Attributes:
        nodes: Subject identifiers (sorted, unique)
        weights: Undirected edge (i, j) -> weight >= 0; missing pairs weigh 0
    """

    model_config = ConfigDict(frozen=True)

    nodes: List[str] = Field(..., min_length=1)
    weights: Dict[Tuple[str, str], float] = Field(default_factory=dict)

    @field_validator("nodes")
    @classmethod
    def validate_nodes(cls, v: List[str]) -> List[str]:
        if len(set(v)) != len(v):
            raise ValueError("duplicate node identifiers")
        return sorted(v)

    @model_validator(mode="before")
    @classmethod
    def normalize_weights(cls, data):
        """Drops self-loops, clamps negatives to 0, symmetrizes keys"""
        if not isinstance(data, dict):
            return data
        known = set(data.get("nodes") or [])
        clean: Dict[Tuple[str, str], float] = {}
        for (i, j), w in dict(data.get("weights") or {}).items():
            if i not in known or j not in known:
                raise ValueError(f"edge ({i}, {j}) references an unknown node")
            if i == j or not np.isfinite(w):
                continue
            clean[edge_key(i, j)] = max(float(w), 0.0)
        return {**data, "weights": clean}

    @property
    def size(self) -> int:
        return len(self.nodes)

    def weight(self, i: str, j: str) -> float:
        return self.weights.get(edge_key(i, j), 0.0)

    def total_weight(self) -> float:
        return float(sum(self.weights.values()))

    def to_matrix(self) -> np.ndarray:
        """Symmetric adjacency matrix in node order"""
        index = {node: k for k, node in enumerate(self.nodes)}
        matrix = np.zeros((self.size, self.size))
        for (i, j), w in self.weights.items():
            matrix[index[i], index[j]] = w
            matrix[index[j], index[i]] = w
        return matrix

    def subgraph(self, members: List[str]) -> "SimilarityGraph":
        keep = set(members)
        return SimilarityGraph(
            nodes=list(members),
            weights={e: w for e, w in self.weights.items() if e[0] in keep and e[1] in keep},
        )

    def mean_weight(self) -> float:
        """Mean over all node pairs (absent edges count as 0)"""
        n_pairs = self.size * (self.size - 1) / 2
        return self.total_weight() / n_pairs if n_pairs else 0.0


def canonical_assignment(assignment: Dict[str, int]) -> Dict[str, int]:
    """Relabels communities 0..k-1 in order of their smallest member"""
    relabel: Dict[int, int] = {}
    for node in sorted(assignment):
        community = assignment[node]
        if community not in relabel:
            relabel[community] = len(relabel)
    return {node: relabel[c] for node, c in assignment.items()}


class Partition(BaseModel):
    """
    Community assignment with its modularity

    Attributes:
        assignment: Node -> community index
        modularity: Weighted Newman modularity of the assignment
    """

    assignment: Dict[str, int]
    modularity: float = Field(..., ge=-1.0, le=1.0)

    @field_validator("assignment")
    @classmethod
    def relabel(cls, v: Dict[str, int]) -> Dict[str, int]:
        return canonical_assignment(v)

    def communities(self) -> List[List[str]]:
        """Member lists, each sorted, ordered by smallest member"""
        grouped: Dict[int, List[str]] = {}
        for node in sorted(self.assignment):
            grouped.setdefault(self.assignment[node], []).append(node)
        return [grouped[k] for k in sorted(grouped)]

    @property
    def n_communities(self) -> int:
        return len(set(self.assignment.values()))


class MergeStep(BaseModel):
    """
    One agglomeration step of Walktrap

    Attributes:
        n_communities: Communities after the merge
        modularity: Modularity of the partition after the merge
        merged: Member lists of the two merged communities
        delta_sigma: Increase of the mean squared walk distance caused by the merge
    """

    n_communities: int = Field(..., ge=1)
    modularity: float
    merged: Tuple[List[str], List[str]]
    delta_sigma: float = Field(..., ge=0)
