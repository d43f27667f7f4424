"""Euclidean distance kernel shared by the exact and approximate paths.

Squared differences are accumulated one coordinate at a time, in coordinate
order, so a given pair of points yields the same double regardless of the
array shape it is evaluated in. The approximation's overestimate guarantee and
its exactness at large ``m2`` rely on this.
"""

from __future__ import annotations

import numpy as np

from hfm.model import PointView

# elements per temporary block (anchors x candidates)
BLOCK = 1 << 21


def broadcast_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distances between ``a[..., :]`` and ``b[..., :]`` after broadcasting.

    The last axis is the coordinate axis.
    """
    dim = a.shape[-1]
    if b.shape[-1] != dim:
        raise ValueError(f"coordinate counts differ: {dim} vs {b.shape[-1]}")
    diff = a[..., 0] - b[..., 0]
    acc = diff * diff
    for k in range(1, dim):
        diff = a[..., k] - b[..., k]
        acc += diff * diff
    return np.sqrt(acc)


def euclidean(p: PointView | np.ndarray, q: PointView | np.ndarray) -> float:
    u = p.vector if isinstance(p, PointView) else np.asarray(p, dtype=np.float64)
    v = q.vector if isinstance(q, PointView) else np.asarray(q, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"vector lengths differ: {u.shape} vs {v.shape}")
    return float(broadcast_distances(u, v))


def min_distances(anchors: np.ndarray, others: np.ndarray) -> np.ndarray:
    """For each row of ``anchors`` the smallest distance to any row of ``others``."""
    out = np.empty(anchors.shape[0], dtype=np.float64)
    if anchors.shape[0] == 0:
        return out
    step = max(1, BLOCK // max(1, others.shape[0]))
    rhs = others[None, :, :]
    for start in range(0, anchors.shape[0], step):
        block = anchors[start:start + step, None, :]
        out[start:start + step] = broadcast_distances(block, rhs).min(axis=1)
    return out
