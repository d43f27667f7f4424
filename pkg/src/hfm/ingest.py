"""CSV ingestion driven by a YAML manifest.

A manifest names the label column, the sensitive columns (with their value
sets and privileged value) and how to treat the remaining columns::

    csv_path: german_credit.csv        # relative to the manifest file
    label_column: credit
    positive_label: 1
    sensitive:
      - column: sex
        groups: {male: [A91, A93, A94], female: [A92, A95]}
        privileged: male
      - column: age
        threshold: 25                  # codes "<=25" and ">25"
        privileged: ">25"
    feature_columns: all               # or an explicit list
    drop_columns: []                   # excluded from "all"
    categorical_columns: auto          # or an explicit list
    na_policy: drop_rows               # or error
    na_values: ["?"]

The privileged value always receives code 1; the other values follow in the
order given. With ``positive_label`` set, labels are binarised (positive -> 1);
``label_threshold`` instead marks values at or above it as positive, and
``label_is_feature: true`` keeps such a numeric label column among the features.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
import yaml

from hfm.errors import ConfigError, DataError, DimensionMismatchError
from hfm.model import Dataset, build_dataset

NA_POLICIES = ("drop_rows", "error")


@dataclass
class SensitiveSpec:
    column: str
    values: list[str]
    privileged: str
    # raw value -> group name; identity when no grouping is declared
    members: dict[str, str] = field(default_factory=dict)
    threshold: float | None = None

    @property
    def codes(self) -> dict[str, int]:
        ordered = [self.privileged] + [v for v in self.values if v != self.privileged]
        return {name: i + 1 for i, name in enumerate(ordered)}

    def encode(self, raw: pd.Series) -> np.ndarray:
        if self.threshold is not None:
            try:
                numeric = pd.to_numeric(raw)
            except (TypeError, ValueError) as exc:
                raise DataError(f"sensitive column {self.column!r} is not numeric") from exc
            names = np.where(numeric > self.threshold, f">{_fmt(self.threshold)}", f"<={_fmt(self.threshold)}")
        else:
            lookup = self.members or {v: v for v in self.values}
            unknown = sorted(set(raw) - set(lookup))
            if unknown:
                raise DataError(f"unknown value(s) {unknown[:5]} in sensitive column {self.column!r}")
            names = raw.map(lookup).to_numpy()
        present = set(names)
        if self.privileged not in present:
            raise DataError(f"privileged value {self.privileged!r} of {self.column!r} never occurs")
        # declared values that never occur get no code, keeping codes contiguous
        order = [v for v in self.codes if v in present]
        codes = {name: i + 1 for i, name in enumerate(order)}
        return np.array([codes[name] for name in names], dtype=np.int64)


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else str(x)


@dataclass
class Manifest:
    csv_path: Path
    label_column: str
    sensitive: list[SensitiveSpec]
    positive_label: str | None = None
    label_threshold: float | None = None
    label_is_feature: bool = False
    drop_columns: list[str] = field(default_factory=list)
    feature_columns: list[str] | str = "all"
    categorical_columns: list[str] | str = "auto"
    na_policy: str = "drop_rows"
    na_values: list[str] = field(default_factory=lambda: ["?"])
    csv_options: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict, base_dir: Path | None = None) -> Manifest:
        if not isinstance(raw, dict):
            raise ConfigError("manifest must be a mapping")
        try:
            csv_path = Path(raw["csv_path"])
            label_column = str(raw["label_column"])
            sensitive_raw = raw["sensitive"]
        except KeyError as exc:
            raise ConfigError(f"manifest is missing required key {exc.args[0]!r}") from None
        if base_dir is not None and not csv_path.is_absolute():
            csv_path = base_dir / csv_path
        if not sensitive_raw:
            raise ConfigError("manifest declares no sensitive attribute")
        sensitive = [_parse_sensitive(s) for s in sensitive_raw]
        positive = raw.get("positive_label")
        na_policy = raw.get("na_policy", "drop_rows")
        if na_policy not in NA_POLICIES:
            raise ConfigError(f"na_policy must be one of {NA_POLICIES}")
        manifest = cls(
            csv_path=csv_path,
            label_column=label_column,
            sensitive=sensitive,
            positive_label=None if positive is None else str(positive),
            label_threshold=None if raw.get("label_threshold") is None else float(raw["label_threshold"]),
            label_is_feature=bool(raw.get("label_is_feature", False)),
            drop_columns=[str(c) for c in raw.get("drop_columns", [])],
            feature_columns=raw.get("feature_columns", "all"),
            categorical_columns=raw.get("categorical_columns", "auto"),
            na_policy=na_policy,
            na_values=[str(v) for v in raw.get("na_values", ["?"])],
            csv_options=dict(raw.get("csv_options", {})),
        )
        sens_cols = {s.column for s in sensitive}
        if label_column in sens_cols:
            raise ConfigError("the label column cannot be sensitive")
        if isinstance(manifest.feature_columns, list):
            clash = sens_cols & set(manifest.feature_columns)
            if clash:
                raise ConfigError(f"columns {sorted(clash)} are both sensitive and features")
        return manifest


def _parse_sensitive(raw: dict) -> SensitiveSpec:
    if not isinstance(raw, dict) or "column" not in raw or "privileged" not in raw:
        raise ConfigError("each sensitive entry needs 'column' and 'privileged'")
    column = str(raw["column"])
    privileged = str(raw["privileged"])
    if "threshold" in raw:
        t = float(raw["threshold"])
        values = [f">{_fmt(t)}", f"<={_fmt(t)}"]
        spec = SensitiveSpec(column, values, privileged, threshold=t)
    elif "groups" in raw:
        groups = raw["groups"]
        if not isinstance(groups, dict):
            raise ConfigError(f"groups of {column!r} must be a mapping")
        members = {}
        for name, raws in groups.items():
            for r in raws:
                members[str(r)] = str(name)
        spec = SensitiveSpec(column, [str(g) for g in groups], privileged, members=members)
    elif "values" in raw:
        spec = SensitiveSpec(column, [str(v) for v in raw["values"]], privileged)
    else:
        raise ConfigError(f"sensitive column {column!r} needs values, groups or threshold")
    if privileged not in spec.values:
        raise ConfigError(f"privileged value {privileged!r} is not among the values of {column!r}")
    if len(spec.values) < 2:
        raise ConfigError(f"sensitive column {column!r} needs at least two values")
    return spec


def load_manifest(path) -> Manifest:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"manifest not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"manifest {path} is not valid YAML: {exc}") from None
    return Manifest.from_dict(raw, base_dir=path.parent)


@dataclass
class DatasetStats:
    n_instances: int
    n_features_raw: int
    n_features_processed: int
    privileged_sizes: list[int]
    joint_both: int | None
    joint_either: int | None
    attribute_names: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n_instances": self.n_instances,
            "n_features_raw": self.n_features_raw,
            "n_features_processed": self.n_features_processed,
            "privileged_sizes": dict(zip(self.attribute_names, self.privileged_sizes))
            if self.attribute_names else list(self.privileged_sizes),
            "joint_both": self.joint_both,
            "joint_either": self.joint_either,
        }


def dataset_stats(dataset: Dataset, n_features_raw: int, attribute_names=None) -> DatasetStats:
    """Privileged-group counts from a built dataset (privileged is code 1).

    ``n_features_raw`` counts the source columns in use (label included); the
    processed count is the encoded features plus the sensitive columns.
    """
    priv = dataset.sensitive == 1
    both = either = None
    if dataset.n_a >= 2:
        both = int(priv.all(axis=1).sum())
        either = int(priv.any(axis=1).sum())
    return DatasetStats(
        n_instances=dataset.n,
        n_features_raw=n_features_raw,
        n_features_processed=dataset.n_x + dataset.n_a,
        privileged_sizes=[int(c) for c in priv.sum(axis=0)],
        joint_both=both,
        joint_either=either,
        attribute_names=list(attribute_names or []),
    )


def read_csv(path, **options) -> pd.DataFrame:
    options.setdefault("float_precision", "round_trip")
    try:
        return pd.read_csv(path, **options)
    except FileNotFoundError:
        raise DataError(f"CSV file not found: {path}") from None
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot parse CSV {path}: {exc}") from None


def _encode_labels(raw: pd.Series, positive: str | None, threshold: float | None = None) -> tuple[np.ndarray, int]:
    if threshold is not None:
        try:
            numeric = pd.to_numeric(raw)
        except (TypeError, ValueError):
            raise DataError("label_threshold needs a numeric label column") from None
        return (numeric >= threshold).to_numpy().astype(np.int64), 2
    if positive is not None:
        if positive not in set(raw):
            raise DataError(f"positive label {positive!r} never occurs")
        return (raw == positive).to_numpy().astype(np.int64), 2
    classes = sorted(set(raw))
    if len(classes) < 2:
        raise DataError("the label column has a single class")
    lookup = {c: i for i, c in enumerate(classes)}
    return raw.map(lookup).to_numpy().astype(np.int64), len(classes)


def load(manifest: Manifest | str | Path, predictions=None) -> tuple[Dataset, DatasetStats]:
    """Build the dataset and its statistics from a manifest.

    ``predictions`` may be a path to a predictions file or a sequence of codes.
    """
    if not isinstance(manifest, Manifest):
        manifest = load_manifest(manifest)
    frame = read_csv(
        manifest.csv_path,
        dtype=str,
        keep_default_na=True,
        na_values=manifest.na_values,
        **manifest.csv_options,
    )
    frame.columns = [str(c).strip() for c in frame.columns]

    sens_cols = [s.column for s in manifest.sensitive]
    needed = [manifest.label_column, *sens_cols]
    if manifest.feature_columns == "all":
        skip = set(needed) | set(manifest.drop_columns)
        feature_cols = [c for c in frame.columns if c not in skip]
        if manifest.label_is_feature:
            feature_cols.append(manifest.label_column)
    elif isinstance(manifest.feature_columns, list):
        feature_cols = [str(c) for c in manifest.feature_columns]
    else:
        raise ConfigError("feature_columns must be 'all' or a list")
    missing = [c for c in needed + feature_cols if c not in frame.columns]
    if missing:
        raise ConfigError(f"columns not found in {manifest.csv_path}: {missing}")
    if not feature_cols:
        raise ConfigError("no feature columns remain")

    used = list(dict.fromkeys(needed + feature_cols))
    n_features_raw = len(used)
    frame = frame[used]
    na_rows = frame.isna().any(axis=1)
    if na_rows.any():
        if manifest.na_policy == "error":
            raise DataError(f"{int(na_rows.sum())} row(s) contain missing values")
        frame = frame.loc[~na_rows].reset_index(drop=True)
    if len(frame) == 0:
        raise DataError("no rows left after dropping missing values")

    labels, n_classes = _encode_labels(frame[manifest.label_column], manifest.positive_label, manifest.label_threshold)
    sensitive = np.column_stack([s.encode(frame[s.column]) for s in manifest.sensitive])
    features = encode_features(frame[feature_cols], manifest.categorical_columns)

    preds = None
    if predictions is not None:
        if isinstance(predictions, (str, Path)):
            preds = load_predictions(predictions, len(frame), n_classes)
        else:
            preds = np.asarray(predictions, dtype=np.int64)
    dataset = build_dataset(features, sensitive, labels, preds, n_classes=n_classes)
    return dataset, dataset_stats(dataset, n_features_raw, sens_cols)


def encode_features(frame: pd.DataFrame, categorical="auto") -> np.ndarray:
    """Numeric columns as-is, categoricals one-hot with levels in lexicographic order."""
    if categorical == "auto":
        categorical = [c for c in frame.columns if pd.to_numeric(frame[c], errors="coerce").isna().any()]
    elif not isinstance(categorical, list):
        raise ConfigError("categorical_columns must be 'auto' or a list")
    blocks = []
    for col in frame.columns:
        values = frame[col]
        if col in categorical:
            levels = sorted(set(values.astype(str)))
            blocks.append(np.stack([(values.astype(str) == lv).to_numpy() for lv in levels], axis=1).astype(np.float64))
        else:
            try:
                blocks.append(pd.to_numeric(values).to_numpy(dtype=np.float64)[:, None])
            except (TypeError, ValueError):
                raise DataError(f"column {col!r} is not numeric; declare it categorical") from None
    return np.hstack(blocks)


def load_predictions(path, n: int, n_classes: int = 2) -> np.ndarray:
    """One class code per line, row-aligned with the dataset."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"predictions file not found: {path}") from None
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if len(lines) != n:
        raise DimensionMismatchError(f"length mismatch: {len(lines)} predictions for {n} rows")
    out = np.empty(n, dtype=np.int64)
    for i, tok in enumerate(lines):
        try:
            value = int(float(tok))
        except ValueError:
            raise DataError(f"line {i + 1}: {tok!r} is not a class code") from None
        if value != float(tok) or not 0 <= value < n_classes:
            raise DataError(f"line {i + 1}: unknown class value {tok!r} (expected 0..{n_classes - 1})")
        out[i] = value
    return out
