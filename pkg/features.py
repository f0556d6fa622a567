"""
Feature construction
Collapses a pairwise series into one refined mean after removing the minor
(noise) cluster of a two-way k-means split
"""

import logging
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import stats
from sklearn.cluster import KMeans

from constants import DEFAULT_SIGNIFICANCE_ALPHA, MIN_SIZE_FOR_OUTLIER_RULE, SeparationTest
from errors import InsufficientDataError
from models import FeatureConfig, PairFeatureSeries, RefinedFeature

logger = logging.getLogger(__name__)


def _split(values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """k=2 k-means seeded at the extremes; returns (major, minor)"""
    kmeans = KMeans(
        n_clusters=2,
        init=np.array([[values[0]], [values[-1]]]),
        n_init=1,
        random_state=0,
    )
    labels = kmeans.fit_predict(values.reshape(-1, 1))
    first, second = values[labels == 0], values[labels == 1]
    if first.size == 0 or second.size == 0:
        return values, np.array([])

    # equal sizes: the higher-mean cluster is signal
    if (first.size, first.mean()) >= (second.size, second.mean()):
        return first, second
    return second, first


def _p_value(major: np.ndarray, minor: np.ndarray, test: SeparationTest) -> float:
    if major.size < 2 or minor.size < 2:
        return float("nan")
    if test == SeparationTest.MANN_WHITNEY:
        return float(stats.mannwhitneyu(major, minor, alternative="two-sided").pvalue)
    if np.ptp(major) == 0.0 and np.ptp(minor) == 0.0:
        # two point masses: separated iff their values differ
        return 0.0 if major[0] != minor[0] else 1.0
    return float(stats.ttest_ind(major, minor, equal_var=False).pvalue)


def feature_construct(
    series: Sequence[float],
    significance_alpha: float = DEFAULT_SIGNIFICANCE_ALPHA,
    test: SeparationTest = SeparationTest.WELCH,
) -> RefinedFeature:
    """
    Noise-refined mean of a pairwise feature series.

    The series is split by k-means (k=2). When the split is significant
    (p < significance_alpha) the mean of the larger cluster is returned,
    dividing by that cluster's own size; otherwise the mean of all points.
    A single-point cluster in a series of at least four points is always
    treated as noise.

    Args:
        series: Feature values; NaN entries are absent and ignored
        significance_alpha: Significance level of the separation test
        test: Two-sample test used on the clusters

    Returns:
        RefinedFeature without pair labels

    Raises:
        InsufficientDataError: If no defined value is present
    """
    values = np.asarray(series, dtype=np.float64).reshape(-1)
    values = np.sort(values[np.isfinite(values)])
    total = int(values.size)
    if total == 0:
        raise InsufficientDataError("feature series has no defined value")

    def _result(kept: np.ndarray, single: bool) -> RefinedFeature:
        return RefinedFeature(
            mean_value=float(np.sum(kept) / kept.size),
            used_count=int(kept.size),
            total_count=total,
            single_cluster=single,
        )

    if values[0] == values[-1]:
        return _result(values, True)

    major, minor = _split(values)
    if minor.size == 0:
        return _result(values, True)
    if minor.size == 1 and total >= MIN_SIZE_FOR_OUTLIER_RULE:
        return _result(major, False)

    p_value = _p_value(major, minor, test)
    if np.isfinite(p_value) and p_value < significance_alpha:
        return _result(major, False)
    return _result(values, True)


def refine_pairs(
    series_by_pair: Dict[Tuple[str, str], PairFeatureSeries],
    config: Optional[FeatureConfig] = None,
) -> Dict[Tuple[str, str], Optional[RefinedFeature]]:
    """Refined feature per pair; None where the series has no defined value"""
    config = config or FeatureConfig()
    refined: Dict[Tuple[str, str], Optional[RefinedFeature]] = {}
    for pair, series in sorted(series_by_pair.items()):
        try:
            feature = feature_construct(series.values, config.significance_alpha, config.test)
        except InsufficientDataError:
            logger.debug(f"{series.kind} feature of {pair} is absent")
            refined[pair] = None
            continue
        refined[pair] = feature.model_copy(
            update={"subject_i": series.subject_i, "subject_j": series.subject_j, "kind": series.kind}
        )
    return refined
