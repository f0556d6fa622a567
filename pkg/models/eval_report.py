"""
Pydantic models for evaluation results
"""

from statistics import mean
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from constants import METHOD_LABELS


class EvalRow(BaseModel):
    """One scenario scored for one method"""

    scenario: str
    method: str
    f1: float = Field(..., ge=0, le=1)
    modularity: float
    decision_path: str = ""


class EvalReport(BaseModel):
    """
    Table-shaped comparison of methods across scenarios

    Attributes:
        rows: Per-scenario rows
    """

    rows: List[EvalRow] = Field(default_factory=list)

    def sorted_rows(self) -> List[EvalRow]:
        return sorted(self.rows, key=lambda r: (r.scenario, r.method))

    def aggregate(self) -> List[EvalRow]:
        """One "overall" row per method (mean F1, mean modularity)"""
        by_method: Dict[str, List[EvalRow]] = {}
        for row in self.rows:
            by_method.setdefault(row.method, []).append(row)
        return [
            EvalRow(
                scenario="overall",
                method=method,
                f1=mean(r.f1 for r in rows),
                modularity=mean(r.modularity for r in rows),
            )
            for method, rows in sorted(by_method.items())
        ]

    def f1_table(self) -> Dict[str, Dict[str, float]]:
        """scenario -> method label -> F1"""
        table: Dict[str, Dict[str, float]] = {}
        for row in self.sorted_rows():
            label = METHOD_LABELS.get(row.method, row.method)
            table.setdefault(row.scenario, {})[label] = row.f1
        return table


class SweepPoint(BaseModel):
    """One method at one noise level"""

    snr_db: Optional[float] = Field(default=None, description="None = noiseless")
    method: str
    f1: float = Field(..., ge=0, le=1)
    same_group_mean: Optional[float] = None
    cross_group_mean: Optional[float] = None


class SeparationStats(BaseModel):
    """
    Same-group vs cross-group pair similarities of one method

    Attributes:
        method: Method name
        same: Mean similarity of every same-group pair
        cross: Mean similarity of every cross-group pair
    """

    method: str
    same: List[float] = Field(default_factory=list)
    cross: List[float] = Field(default_factory=list)

    @staticmethod
    def _quartiles(values: List[float]) -> Optional[Tuple[float, float, float]]:
        if not values:
            return None
        q1, q2, q3 = np.percentile(values, [25, 50, 75])
        return (float(q1), float(q2), float(q3))

    @staticmethod
    def ecdf(values: List[float]) -> Tuple[List[float], List[float]]:
        """Sorted values and their cumulative fractions"""
        ordered = sorted(values)
        n = len(ordered)
        return ordered, [(k + 1) / n for k in range(n)]

    def same_quartiles(self) -> Optional[Tuple[float, float, float]]:
        return self._quartiles(self.same)

    def cross_quartiles(self) -> Optional[Tuple[float, float, float]]:
        return self._quartiles(self.cross)

    def gap(self) -> Optional[float]:
        """Mean same-group similarity minus mean cross-group similarity"""
        if not self.same or not self.cross:
            return None
        return mean(self.same) - mean(self.cross)


class BenchmarkRow(BaseModel):
    """Cost of one method's acoustic-feature computation"""

    method: str
    repeats: int = Field(..., ge=1)
    wall_s: float = Field(..., ge=0, description="Fastest wall time over the repeats")
    peak_kib: float = Field(..., ge=0, description="Peak traced memory of one run")
