"""Fairness measures built on the set distances, plus group-fairness baselines."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from hfm.approx import ApproxParams, extenddist
from hfm.errors import ConfigError, DataError, DimensionMismatchError, MissingPredictionsError, ZeroDistanceError
from hfm.exact import exact_all_attrs
from hfm.model import Dataset, DistanceReport, LabelChannel, Method

LOG_BASE = 10


def hfm(d_data: float, d_model: float) -> float:
    """``log10(d_model / d_data)``: positive when the classifier widens the gap."""
    if not d_data > 0 or not d_model > 0:
        raise ZeroDistanceError(
            f"zero distance: log ratio undefined for d_data={d_data}, d_model={d_model}"
        )
    return math.log10(d_model / d_data)


def hfm_prev(d_data: float, d_model: float) -> float:
    """Ratio-minus-one variant; defined for a zero model distance."""
    if not d_data > 0:
        raise ZeroDistanceError(f"zero distance: d_data={d_data}")
    return d_model / d_data - 1.0


def _rate(event: np.ndarray, given: np.ndarray) -> float | None:
    total = int(given.sum())
    if total == 0:
        return None
    return int((event & given).sum()) / total


def _abs_gap(a: float | None, b: float | None) -> float | None:
    if a is None or b is None:
        return None
    return abs(a - b)


@dataclass(frozen=True)
class GroupFairness:
    """Absolute rate gaps between the privileged group and everyone else.
    ``None`` marks a measure whose conditioning set is empty."""

    dp: float | None
    eo: float | None
    pqp: float | None


def group_fairness(dataset: Dataset, attr: int, privileged_value: int = 1, positive_label: int = 1) -> GroupFairness:
    if dataset.predictions is None:
        raise MissingPredictionsError("group fairness needs predictions")
    if not 0 <= attr < dataset.n_a:
        raise IndexError(f"attribute index {attr} out of range (n_a={dataset.n_a})")
    if not 1 <= privileged_value <= dataset.attr_cardinalities[attr]:
        raise DataError(
            f"privileged value {privileged_value} is not a code of attribute {attr}"
        )
    priv = dataset.sensitive[:, attr] == privileged_value
    rest = ~priv
    pred_pos = dataset.predictions == positive_label
    true_pos = dataset.labels == positive_label

    dp = _abs_gap(_rate(pred_pos, priv), _rate(pred_pos, rest))
    eo = _abs_gap(_rate(pred_pos, priv & true_pos), _rate(pred_pos, rest & true_pos))
    pqp = _abs_gap(_rate(true_pos, priv & pred_pos), _rate(true_pos, rest & pred_pos))
    return GroupFairness(dp, eo, pqp)


def discriminative_risk(predictions, perturbed_predictions) -> float:
    """Share of rows whose prediction changes once sensitive attributes are perturbed."""
    a = np.asarray(predictions)
    b = np.asarray(perturbed_predictions)
    if a.ndim != 1 or a.shape != b.shape:
        raise DimensionMismatchError(f"length mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise DataError("discriminative risk needs at least one row")
    return float(np.count_nonzero(a != b)) / a.size


@dataclass
class BaselineConfig:
    """Inputs for the baselines. ``privileged`` defaults to code 1 for every
    attribute; ``perturbed`` holds one prediction sequence per attribute."""

    privileged: list[int] | None = None
    positive_label: int = 1
    perturbed: list | None = None


@dataclass
class AttributeFairness:
    attr: int
    df: float | None
    df_avg: float | None
    df_prev: float | None
    dp: float | None = None
    eo: float | None = None
    pqp: float | None = None
    dr: float | None = None


@dataclass
class FairnessReport:
    df: float | None
    df_avg: float | None
    df_prev: float | None
    per_attribute: list[AttributeFairness]
    dr_avg: float | None
    method: Method
    data_distance: DistanceReport
    model_distance: DistanceReport
    log_base: int = LOG_BASE
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "df": self.df,
            "df_avg": self.df_avg,
            "df_prev": self.df_prev,
            "dr_avg": self.dr_avg,
            "log_base": self.log_base,
            "method": Method(self.method).value,
            "per_attribute": [asdict(a) for a in self.per_attribute],
            "data_distance": self.data_distance.to_dict(),
            "model_distance": self.model_distance.to_dict(),
            "notes": list(self.notes),
        }


def _safe(fn, *args):
    try:
        return fn(*args)
    except ZeroDistanceError:
        return None


def distance_report(dataset: Dataset, method: Method, channel: LabelChannel, params: ApproxParams | None, workers: int = 1) -> DistanceReport:
    method = Method(method)
    if method is Method.EXACT:
        return exact_all_attrs(dataset, channel, workers=workers)
    if params is None:
        params = ApproxParams.auto(dataset.n)
    return extenddist(dataset, channel, params, workers=workers)


def fairness_report(
    dataset: Dataset,
    distance_method: Method = Method.EXACT,
    params: ApproxParams | None = None,
    baseline_config: BaselineConfig | None = None,
    workers: int = 1,
) -> FairnessReport:
    """HFM at aggregate and per-attribute level, with optional baselines.

    Both distance reports use the same method and, for the approximation, the
    same seed, so identical labels and predictions give a zero measure.
    """
    if dataset.predictions is None:
        raise MissingPredictionsError("fairness_report needs predictions")
    method = Method(distance_method)
    if method is Method.APPROX and params is None:
        params = ApproxParams.auto(dataset.n)
    data = distance_report(dataset, method, LabelChannel.TRUE_LABELS, params, workers)
    model = distance_report(dataset, method, LabelChannel.PREDICTIONS, params, workers)

    notes = []
    per_attr = []
    for d_row, m_row in zip(data.per_attribute, model.per_attribute):
        per_attr.append(AttributeFairness(
            attr=d_row.attr,
            df=_safe(hfm, d_row.d_max, m_row.d_max),
            df_avg=_safe(hfm, d_row.d_avg, m_row.d_avg),
            df_prev=_safe(hfm_prev, d_row.d_max, m_row.d_max),
        ))

    dr_avg = None
    if baseline_config is not None:
        privileged = baseline_config.privileged or [1] * dataset.n_a
        if len(privileged) != dataset.n_a:
            raise ConfigError("one privileged value per attribute is required")
        perturbed = baseline_config.perturbed
        if perturbed is not None and len(perturbed) != dataset.n_a:
            raise ConfigError("one perturbed prediction sequence per attribute is required")
        drs = []
        for row, priv in zip(per_attr, privileged):
            gf = group_fairness(dataset, row.attr, priv, baseline_config.positive_label)
            row.dp, row.eo, row.pqp = gf.dp, gf.eo, gf.pqp
            if perturbed is not None:
                row.dr = discriminative_risk(dataset.predictions, perturbed[row.attr])
                drs.append(row.dr)
        if drs:
            dr_avg = float(np.mean(drs))
        else:
            notes.append("no perturbed predictions supplied; DR not computed")

    df = _safe(hfm, data.aggregate_max, model.aggregate_max)
    df_avg = _safe(hfm, data.aggregate_avg, model.aggregate_avg)
    if df is None or df_avg is None:
        notes.append("zero distance encountered; affected log ratios reported as null")
    return FairnessReport(
        df=df,
        df_avg=df_avg,
        df_prev=_safe(hfm_prev, data.aggregate_max, model.aggregate_max),
        per_attribute=per_attr,
        dr_avg=dr_avg,
        method=method,
        data_distance=data,
        model_distance=model,
        notes=notes,
    )
