"""In-memory data model shared by the distance, fairness and analysis modules."""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, field

import numpy as np

from hfm.errors import (
    DataError,
    DegenerateAttributeError,
    DimensionMismatchError,
    MissingPredictionsError,
    NonFiniteInputError,
)


class LabelChannel(str, enum.Enum):
    """Which label column fills the leading coordinate of a point."""

    TRUE_LABELS = "true"
    PREDICTIONS = "pred"


class Method(str, enum.Enum):
    EXACT = "exact"
    APPROX = "approx"


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    """Encoded table: scaled features, 1-based sensitive codes, class codes.

    Instances are immutable; the arrays are flagged read-only.
    """

    features: np.ndarray
    sensitive: np.ndarray
    labels: np.ndarray
    predictions: np.ndarray | None
    attr_cardinalities: tuple[int, ...]
    n_classes: int

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        sensitive = np.asarray(self.sensitive, dtype=np.int64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if features.ndim != 2 or sensitive.ndim != 2 or labels.ndim != 1:
            raise DimensionMismatchError("features and sensitive must be 2-D, labels 1-D")
        n = labels.shape[0]
        if features.shape[0] != n or sensitive.shape[0] != n:
            raise DimensionMismatchError(
                f"row counts disagree: features {features.shape[0]}, "
                f"sensitive {sensitive.shape[0]}, labels {n}"
            )
        if n < 2:
            raise DataError("a dataset needs at least two rows")
        if features.shape[1] < 1 or sensitive.shape[1] < 1:
            raise DimensionMismatchError("need at least one feature and one sensitive attribute")
        if not np.all(np.isfinite(features)):
            raise NonFiniteInputError("features contain NaN or infinity")
        if features.min() < 0.0 or features.max() > 1.0:
            raise DataError("features must lie in [0, 1]")
        if self.n_classes < 2:
            raise DataError("n_classes must be at least 2")
        if labels.min() < 0 or labels.max() >= self.n_classes:
            raise DataError(f"labels must lie in 0..{self.n_classes - 1}")
        cards = tuple(int(c) for c in self.attr_cardinalities)
        if len(cards) != sensitive.shape[1]:
            raise DimensionMismatchError("one cardinality per sensitive column is required")
        for i, card in enumerate(cards):
            _check_attribute(sensitive[:, i], card, i)

        predictions = self.predictions
        if predictions is not None:
            predictions = np.asarray(predictions, dtype=np.int64)
            if predictions.shape != (n,):
                raise DimensionMismatchError(
                    f"predictions have shape {predictions.shape}, expected ({n},)"
                )
            if predictions.min() < 0 or predictions.max() >= self.n_classes:
                raise DataError(f"predictions must lie in 0..{self.n_classes - 1}")
            predictions = _frozen(predictions)

        object.__setattr__(self, "features", _frozen(features))
        object.__setattr__(self, "sensitive", _frozen(sensitive))
        object.__setattr__(self, "labels", _frozen(labels))
        object.__setattr__(self, "predictions", predictions)
        object.__setattr__(self, "attr_cardinalities", cards)

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    @property
    def n_x(self) -> int:
        return self.features.shape[1]

    @property
    def n_a(self) -> int:
        return self.sensitive.shape[1]

    @property
    def has_predictions(self) -> bool:
        return self.predictions is not None

    def channel_values(self, channel: LabelChannel) -> np.ndarray:
        channel = LabelChannel(channel)
        if channel is LabelChannel.PREDICTIONS:
            if self.predictions is None:
                raise MissingPredictionsError("the Predictions channel needs predictions")
            return self.predictions
        return self.labels

    def points(self, channel: LabelChannel) -> np.ndarray:
        """Matrix whose row i is ``[label_i, x_i1, ..., x_in_x]``."""
        y = self.channel_values(channel).astype(np.float64)
        pts = np.empty((self.n, 1 + self.n_x), dtype=np.float64)
        pts[:, 0] = y
        pts[:, 1:] = self.features
        pts.setflags(write=False)
        return pts

    def with_predictions(self, predictions) -> Dataset:
        return Dataset(
            self.features,
            self.sensitive,
            self.labels,
            None if predictions is None else np.asarray(predictions),
            self.attr_cardinalities,
            self.n_classes,
        )

    def take(self, rows) -> Dataset:
        """Row subset or permutation; cardinalities are kept."""
        rows = np.asarray(rows)
        return Dataset(
            self.features[rows],
            self.sensitive[rows],
            self.labels[rows],
            None if self.predictions is None else self.predictions[rows],
            self.attr_cardinalities,
            self.n_classes,
        )


def _check_attribute(column: np.ndarray, card: int, index: int) -> None:
    if card < 2 or np.unique(column).size < 2:
        raise DegenerateAttributeError(
            f"degenerate attribute {index}: needs at least two distinct values"
        )
    if column.min() < 1 or column.max() > card:
        raise DataError(f"attribute {index} codes must lie in 1..{card}")
    counts = np.bincount(column, minlength=card + 1)[1:]
    missing = np.flatnonzero(counts == 0) + 1
    if missing.size:
        raise DataError(f"attribute {index} never takes declared value(s) {missing.tolist()}")


@dataclass(frozen=True)
class PointView:
    vector: np.ndarray
    group: int
    row: int


def point_view(dataset: Dataset, row: int, channel: LabelChannel, attr: int = 0) -> PointView:
    if not 0 <= row < dataset.n:
        raise IndexError(f"row {row} out of range for n={dataset.n}")
    y = float(dataset.channel_values(channel)[row])
    vector = np.concatenate(([y], dataset.features[row]))
    vector.setflags(write=False)
    return PointView(vector=vector, group=int(dataset.sensitive[row, attr]), row=row)


def minmax_scale(features: np.ndarray) -> np.ndarray:
    """Per-column min-max scaling to [0, 1]; constant columns become zeros."""
    features = np.asarray(features, dtype=np.float64)
    lo = features.min(axis=0)
    span = features.max(axis=0) - lo
    out = np.zeros_like(features)
    live = span > 0
    out[:, live] = (features[:, live] - lo[live]) / span[live]
    # guard the top end against rounding above 1
    np.clip(out, 0.0, 1.0, out=out)
    return out


def build_dataset(features, sensitive, labels, predictions=None, n_classes: int | None = None) -> Dataset:
    """Validate, scale and encode raw arrays into a :class:`Dataset`.

    ``sensitive`` holds positive integer codes; each column's cardinality is its
    observed maximum and every code below it must occur. ``n_classes`` defaults
    to the largest class code seen plus one (at least 2).
    """
    features = np.asarray(features, dtype=np.float64)
    sensitive = np.asarray(sensitive)
    labels = np.asarray(labels)
    if features.ndim == 1:
        features = features[:, None]
    if sensitive.ndim == 1:
        sensitive = sensitive[:, None]
    n = labels.shape[0]
    if features.shape[0] != n or sensitive.shape[0] != n:
        raise DimensionMismatchError(
            f"row counts disagree: features {features.shape[0]}, "
            f"sensitive {sensitive.shape[0]}, labels {n}"
        )
    if predictions is not None:
        predictions = np.asarray(predictions)
        if predictions.shape != (n,):
            raise DimensionMismatchError(
                f"predictions have shape {predictions.shape}, expected ({n},)"
            )
    if not np.all(np.isfinite(features)):
        raise NonFiniteInputError("features contain NaN or infinity")
    if not np.issubdtype(sensitive.dtype, np.integer):
        if not np.all(np.isfinite(sensitive)) or np.any(sensitive != np.round(sensitive)):
            raise DataError("sensitive codes must be integers")
        sensitive = sensitive.astype(np.int64)
    if sensitive.size and sensitive.min() < 1:
        raise DataError("sensitive codes must be positive")

    for i in range(sensitive.shape[1]):
        if np.unique(sensitive[:, i]).size < 2:
            raise DegenerateAttributeError(
                f"degenerate attribute {i}: a single distinct value leaves an empty complement"
            )
    cards = tuple(int(c) for c in sensitive.max(axis=0))

    if n_classes is None:
        top = int(labels.max()) if n else 0
        if predictions is not None:
            top = max(top, int(predictions.max()))
        n_classes = max(2, top + 1)

    return Dataset(minmax_scale(features), sensitive, labels, predictions, cards, n_classes)


@dataclass(frozen=True)
class AttributeDistance:
    attr: int
    d_max: float
    d_avg: float


@dataclass
class DistanceReport:
    per_attribute: list[AttributeDistance]
    aggregate_max: float
    aggregate_avg: float
    method: Method
    channel: LabelChannel
    seed: int | None = None
    m1: int | None = None
    m2: int | None = None
    wall_time_seconds: float = 0.0
    distance_evaluations: int | None = None
    single_direction: bool = False
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["method"] = Method(self.method).value
        out["channel"] = LabelChannel(self.channel).value
        return out


def aggregate(per_attribute: list[AttributeDistance]) -> tuple[float, float]:
    """Max of the per-attribute maxima and mean of the per-attribute averages."""
    d_max = max(a.d_max for a in per_attribute)
    d_avg = float(np.mean([a.d_avg for a in per_attribute]))
    return float(d_max), d_avg
