"""Direct O(n^2) evaluation of the set distances.

This is the reference the approximation is checked against, so it stays naive
on purpose: every point is compared with every member of its complement.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from functools import partial

import numpy as np

from hfm.distance import min_distances
from hfm.errors import DataError, DegenerateAttributeError
from hfm.model import (
    AttributeDistance,
    Dataset,
    DistanceReport,
    LabelChannel,
    Method,
    aggregate,
)
from hfm.parallel import pmap


@dataclass(frozen=True)
class PerPointMins:
    """Entry i is the distance from point i to the nearest point outside its group."""

    values: np.ndarray

    @property
    def d_max(self) -> float:
        return float(self.values.max())

    @property
    def d_avg(self) -> float:
        return stable_mean(self.values)


def stable_mean(values: np.ndarray) -> float:
    # fsum is correctly rounded, hence independent of row order
    return math.fsum(values.tolist()) / values.shape[0]


def _check_attr(dataset: Dataset, attr: int) -> np.ndarray:
    if not 0 <= attr < dataset.n_a:
        raise IndexError(f"attribute index {attr} out of range (n_a={dataset.n_a})")
    groups = dataset.sensitive[:, attr]
    if np.unique(groups).size < 2:
        raise DegenerateAttributeError(f"degenerate attribute {attr}: empty complement")
    return groups


def per_point_mins(dataset: Dataset, attr: int, channel: LabelChannel) -> PerPointMins:
    groups = _check_attr(dataset, attr)
    pts = dataset.points(channel)
    out = np.empty(dataset.n, dtype=np.float64)
    for code in np.unique(groups):
        inside = groups == code
        out[inside] = min_distances(pts[inside], pts[~inside])
    out.setflags(write=False)
    return PerPointMins(out)


def exact_attr_distance(dataset: Dataset, attr: int, channel: LabelChannel = LabelChannel.TRUE_LABELS):
    """Maximal and average distance for one attribute, plus the per-point minima.

    Returns ``(d_max, d_avg, per_point)``.
    """
    mins = per_point_mins(dataset, attr, channel)
    return mins.d_max, mins.d_avg, mins


def _attr_job(dataset: Dataset, channel: LabelChannel, attr: int) -> AttributeDistance:
    d_max, d_avg, _ = exact_attr_distance(dataset, attr, channel)
    return AttributeDistance(attr, d_max, d_avg)


def exact_all_attrs(
    dataset: Dataset,
    channel: LabelChannel = LabelChannel.TRUE_LABELS,
    workers: int = 1,
) -> DistanceReport:
    channel = LabelChannel(channel)
    start = time.perf_counter()
    rows = pmap(partial(_attr_job, dataset, channel), range(dataset.n_a), workers)
    d_max, d_avg = aggregate(rows)
    return DistanceReport(
        per_attribute=rows,
        aggregate_max=d_max,
        aggregate_avg=d_avg,
        method=Method.EXACT,
        channel=channel,
        wall_time_seconds=time.perf_counter() - start,
    )


def hausdorff_two_sets(dataset: Dataset, attr: int, channel: LabelChannel = LabelChannel.TRUE_LABELS) -> float:
    """Symmetric max-min distance between the two groups of a binary attribute."""
    groups = _check_attr(dataset, attr)
    codes = np.unique(groups)
    if codes.size != 2:
        raise DataError(f"attribute {attr} has {codes.size} values; two are required")
    pts = dataset.points(channel)
    first = pts[groups == codes[0]]
    second = pts[groups == codes[1]]
    forward = min_distances(first, second).max()
    backward = min_distances(second, first).max()
    return float(max(forward, backward))
