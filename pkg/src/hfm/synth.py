"""Random datasets for tests and benchmarks."""

from __future__ import annotations

import numpy as np

from hfm.model import Dataset, build_dataset


def random_dataset(
    n: int,
    n_x: int,
    cardinalities=(2,),
    seed: int = 0,
    n_classes: int = 2,
    flip: float | None = 0.2,
) -> Dataset:
    """Uniform features, random sensitive codes (each value present), random labels.

    With ``flip`` set, predictions copy the labels and each is replaced by a
    random class with that probability; ``flip=None`` leaves predictions out.
    """
    rng = np.random.default_rng(seed)
    if n < max(cardinalities):
        raise ValueError("n must cover every attribute value")
    features = rng.random((n, n_x))
    columns = []
    for card in cardinalities:
        col = np.concatenate([np.arange(1, card + 1), rng.integers(1, card + 1, n - card)])
        columns.append(rng.permutation(col))
    sensitive = np.column_stack(columns)
    labels = rng.integers(0, n_classes, n)
    predictions = None
    if flip is not None:
        predictions = labels.copy()
        swap = rng.random(n) < flip
        predictions[swap] = rng.integers(0, n_classes, int(swap.sum()))
    return build_dataset(features, sensitive, labels, predictions, n_classes=n_classes)
