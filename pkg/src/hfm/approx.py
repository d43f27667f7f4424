"""Randomised 1-D projection approximation of the set distances.

``acceledist`` sorts the points along one direction and compares each anchor
with at most ``m2`` out-of-group neighbours on either side. ``approxdist``
repeats that over ``m1`` orthogonal direction pairs and keeps the minima;
``extenddist`` runs it for every sensitive attribute and aggregates.

Every per-point value is an exact distance to *some* complement member, so the
result can only overestimate the true minimum. Random directions come from
counter-based streams keyed by ``(master_seed, attr, repetition)``; the number
of workers never changes a result.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from functools import partial

import numpy as np

from hfm.distance import broadcast_distances
from hfm.errors import ConfigError
from hfm.exact import _check_attr
from hfm.model import (
    AttributeDistance,
    Dataset,
    DistanceReport,
    LabelChannel,
    Method,
    PointView,
    aggregate,
)
from hfm.parallel import pmap

NORM_FLOOR = 1e-12
# elements per gathered candidate block; small enough to stay cache-resident
SCAN_BLOCK = 1 << 16
DEFAULT_M1 = 25


def default_m2(n: int) -> int:
    """``ceil(2 * lg n)``, the per-side comparison count used by default."""
    return max(1, math.ceil(2 * math.log10(n)))


@dataclass(frozen=True)
class ApproxParams:
    m1: int = DEFAULT_M1
    m2: int = 1
    master_seed: int = 0

    def __post_init__(self):
        for name in ("m1", "m2"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if not isinstance(self.master_seed, (int, np.integer)) or self.master_seed < 0:
            raise ConfigError(f"master_seed must be an unsigned integer, got {self.master_seed!r}")

    @classmethod
    def auto(cls, n: int, m1: int = DEFAULT_M1, master_seed: int = 0) -> ApproxParams:
        return cls(m1=m1, m2=default_m2(n), master_seed=master_seed)


@dataclass(frozen=True)
class ProjectionTask:
    """Direction pair of one repetition. ``w1`` is None when only one
    coordinate exists and no orthogonal partner is possible."""

    w0: np.ndarray
    w1: np.ndarray | None
    attr: int
    repetition_index: int
    stream_seed: int

    @property
    def directions(self) -> list[np.ndarray]:
        return [self.w0] if self.w1 is None else [self.w0, self.w1]


def stream(master_seed: int, attr: int, repetition: int) -> tuple[np.random.Generator, int]:
    """Independent generator for one (attribute, repetition) cell and its seed id."""
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(int(attr), int(repetition)))
    stream_seed = int(seq.generate_state(1, dtype=np.uint64)[0])
    return np.random.Generator(np.random.Philox(seq)), stream_seed


def _nonzero_uniform(rng: np.random.Generator, dim: int) -> np.ndarray:
    while True:
        w = rng.uniform(-1.0, 1.0, size=dim)
        if np.linalg.norm(w) >= NORM_FLOOR:
            return w


def sample_orthogonal_pair(rng: np.random.Generator, dim: int):
    """Two orthogonal directions in the box [-1, 1]^dim.

    For ``dim == 1`` there is no orthogonal partner and ``(w0, None)`` is
    returned.
    """
    if dim < 1:
        raise ValueError("dim must be positive")
    w0 = _nonzero_uniform(rng, dim)
    if dim == 1:
        return w0, None
    w0_sq = float(w0 @ w0)
    while True:
        w1 = _nonzero_uniform(rng, dim)
        w1 = w1 - (float(w1 @ w0) / w0_sq) * w0
        if np.linalg.norm(w1) >= NORM_FLOOR:
            break
    w1 = w1 / np.abs(w1).max()
    return w0, w1


def projection_task(master_seed: int, attr: int, repetition: int, dim: int) -> ProjectionTask:
    rng, seed = stream(master_seed, attr, repetition)
    w0, w1 = sample_orthogonal_pair(rng, dim)
    return ProjectionTask(w0, w1, attr, repetition, seed)


def project(point: PointView | np.ndarray, w: np.ndarray) -> float:
    vector = point.vector if isinstance(point, PointView) else np.asarray(point, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if vector.shape != w.shape:
        raise ValueError(f"direction has {w.shape[0]} entries, point has {vector.shape[0]}")
    return float(vector @ w)


def scan_min_distances(pts: np.ndarray, groups: np.ndarray, w: np.ndarray, m2: int):
    """Per-point approximate complement minima along direction ``w``.

    Returns ``(d_min, evaluations)`` with ``d_min`` in original row order.
    """
    n, dim = pts.shape
    order = np.argsort(pts @ w, kind="stable")
    sorted_groups = groups[order]
    d_min = np.empty(n, dtype=np.float64)
    evaluations = 0
    for code in np.unique(sorted_groups):
        anchor_pos = np.flatnonzero(sorted_groups == code)
        comp_pos = np.flatnonzero(sorted_groups != code)
        m = min(m2, comp_pos.size)
        # number of complement members sorted strictly before each anchor
        before = np.searchsorted(comp_pos, anchor_pos)
        offsets = np.arange(-m, m)
        step = max(1, SCAN_BLOCK // (2 * m * dim))
        for start in range(0, anchor_pos.size, step):
            idx = before[start:start + step, None] + offsets
            valid = (idx >= 0) & (idx < comp_pos.size)
            cand_rows = order[comp_pos[np.clip(idx, 0, comp_pos.size - 1)]]
            anchor_rows = order[anchor_pos[start:start + step]]
            dist = broadcast_distances(pts[anchor_rows][:, None, :], pts[cand_rows])
            dist[~valid] = np.inf
            d_min[anchor_rows] = dist.min(axis=1)
            evaluations += int(valid.sum())
    return d_min, evaluations


def acceledist(
    dataset: Dataset,
    attr: int,
    channel: LabelChannel,
    w: np.ndarray,
    m2: int,
    counter: list | None = None,
):
    """Single-direction scan. Returns ``(t_max, t_sum)``.

    If ``counter`` is a list, the number of distance evaluations is appended.
    """
    groups = _check_attr(dataset, attr)
    pts = dataset.points(channel)
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (pts.shape[1],):
        raise ValueError(f"direction must have {pts.shape[1]} entries")
    d_min, evaluations = scan_min_distances(pts, groups, w, m2)
    if counter is not None:
        counter.append(evaluations)
    return float(d_min.max()), math.fsum(d_min.tolist())


@dataclass(frozen=True)
class RepetitionResult:
    attr: int
    repetition: int
    d_max: float
    d_sum: float
    evaluations: int
    single_direction: bool


def _repetition(dataset: Dataset, channel: LabelChannel, params: ApproxParams, cell) -> RepetitionResult:
    attr, rep = cell
    groups = dataset.sensitive[:, attr]
    pts = dataset.points(channel)
    task = projection_task(params.master_seed, attr, rep, pts.shape[1])
    t_max, t_sum, evaluations = [], [], 0
    for w in task.directions:
        d_min, count = scan_min_distances(pts, groups, w, params.m2)
        t_max.append(float(d_min.max()))
        t_sum.append(math.fsum(d_min.tolist()))
        evaluations += count
    # minima over directions taken independently for max and sum
    return RepetitionResult(attr, rep, min(t_max), min(t_sum), evaluations, task.w1 is None)


@dataclass(frozen=True)
class ApproxResult:
    d_max: float
    d_avg: float
    evaluations: int
    single_direction: bool


def _run_cells(dataset, channel, params, attrs, workers) -> dict[int, ApproxResult]:
    channel = LabelChannel(channel)
    for attr in attrs:
        _check_attr(dataset, attr)
    dataset.channel_values(channel)
    cells = [(a, r) for a in attrs for r in range(params.m1)]
    results = pmap(partial(_repetition, dataset, channel, params), cells, workers)
    out = {}
    for attr in attrs:
        mine = [r for r in results if r.attr == attr]
        out[attr] = ApproxResult(
            d_max=min(r.d_max for r in mine),
            d_avg=min(r.d_sum for r in mine) / dataset.n,
            evaluations=sum(r.evaluations for r in mine),
            single_direction=any(r.single_direction for r in mine),
        )
    return out


def approxdist_detail(dataset, attr, channel, params: ApproxParams, workers: int = 1) -> ApproxResult:
    return _run_cells(dataset, channel, params, [attr], workers)[attr]


def approxdist(dataset: Dataset, attr: int, channel: LabelChannel, params: ApproxParams, workers: int = 1):
    """Approximate ``(d_max, d_avg)`` for one attribute; never below the exact values."""
    res = approxdist_detail(dataset, attr, channel, params, workers)
    return res.d_max, res.d_avg


def extenddist(
    dataset: Dataset,
    channel: LabelChannel,
    params: ApproxParams,
    workers: int = 1,
) -> DistanceReport:
    channel = LabelChannel(channel)
    start = time.perf_counter()
    results = _run_cells(dataset, channel, params, list(range(dataset.n_a)), workers)
    rows = [AttributeDistance(a, r.d_max, r.d_avg) for a, r in results.items()]
    d_max, d_avg = aggregate(rows)
    return DistanceReport(
        per_attribute=rows,
        aggregate_max=d_max,
        aggregate_avg=d_avg,
        method=Method.APPROX,
        channel=channel,
        seed=int(params.master_seed),
        m1=int(params.m1),
        m2=int(params.m2),
        wall_time_seconds=time.perf_counter() - start,
        distance_evaluations=sum(r.evaluations for r in results.values()),
        single_direction=any(r.single_direction for r in results.values()),
        extra={"evaluations_per_attribute": [r.evaluations for r in results.values()]},
    )
