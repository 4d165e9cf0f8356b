"""Dataset ingestion and serialization: sparse-text and CSV readers that
densify on load, plus exact-round-trip writers.

All parse failures carry the 1-based line and column (character offset for
the sparse text format, field index for CSV) of the offending token.
"""

import csv
import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError, ValidationError
from .linops import as_dense_matrix, as_vector

__all__ = ["Dataset", "read_libsvm", "read_csv", "write_libsvm", "write_csv"]

_TOKEN = re.compile(r"\S+")


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    source_format: str

    def __post_init__(self):
        a = as_dense_matrix(self.features, "features")
        b = as_vector(self.labels, "labels", size=a.shape[0])
        if self.source_format not in ("libsvm", "csv"):
            raise ValidationError(
                f"source_format must be 'libsvm' or 'csv', got {self.source_format!r}"
            )
        object.__setattr__(self, "features", a)
        object.__setattr__(self, "labels", b)

    @property
    def n_samples(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]


def _parse_finite(token):
    try:
        value = float(token)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def read_libsvm(path, n_features=None):
    """Read label-indexed sparse text: per line "label idx:val idx:val ...",
    indices 1-based. Missing indices densify to 0; the feature count is the
    largest index observed unless ``n_features`` overrides it upward.
    """
    if n_features is not None and n_features < 1:
        raise ValidationError(f"n_features must be >= 1, got {n_features}")
    rows = []
    labels = []
    max_index = 0
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            tokens = list(_TOKEN.finditer(line))
            if not tokens:
                continue
            label = _parse_finite(tokens[0].group())
            if label is None:
                raise DataFormatError(
                    path, line_no, f"label {tokens[0].group()!r} is not a finite number",
                    column=tokens[0].start() + 1,
                )
            entries = {}
            for match in tokens[1:]:
                token = match.group()
                col = match.start() + 1
                idx_text, sep, val_text = token.partition(":")
                if not sep:
                    raise DataFormatError(
                        path, line_no, f"feature token {token!r} is missing ':'",
                        column=col,
                    )
                if not idx_text.isdigit() or int(idx_text) < 1:
                    raise DataFormatError(
                        path, line_no,
                        f"feature index {idx_text!r} is not a positive integer",
                        column=col,
                    )
                value = _parse_finite(val_text)
                if value is None:
                    raise DataFormatError(
                        path, line_no,
                        f"feature value {val_text!r} is not a finite number",
                        column=col + len(idx_text) + 1,
                    )
                idx = int(idx_text)
                if idx in entries:
                    raise DataFormatError(
                        path, line_no, f"duplicate feature index {idx}", column=col
                    )
                if n_features is not None and idx > n_features:
                    raise DataFormatError(
                        path, line_no,
                        f"feature index {idx} exceeds declared count {n_features}",
                        column=col,
                    )
                entries[idx] = value
            labels.append(label)
            rows.append(entries)
            if entries:
                max_index = max(max_index, max(entries))
    if not rows:
        raise DataFormatError(path, 1, "file contains no data")
    width = n_features if n_features is not None else max_index
    if width == 0:
        raise DataFormatError(path, 1, "no feature indices found")
    features = np.zeros((len(rows), width))
    for i, entries in enumerate(rows):
        for idx, value in entries.items():
            features[i, idx - 1] = value
    return Dataset(features=features, labels=np.array(labels), source_format="libsvm")


def read_csv(path, label_column=0):
    """Read a rectangular numeric CSV; a non-numeric first line is treated
    as a header and skipped. The label column is extracted and the remaining
    columns form the features in file order."""
    if label_column < 0:
        raise ValidationError(f"label_column must be >= 0, got {label_column}")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        raw = [(no, row) for no, row in enumerate(csv.reader(fh), start=1) if row]
    if raw:
        first = [_parse_finite(cell.strip()) for cell in raw[0][1]]
        if any(v is None for v in first):
            raw = raw[1:]
    if not raw:
        raise DataFormatError(path, 1, "file contains no data")
    width = len(raw[0][1])
    if label_column >= width:
        raise ValidationError(
            f"label_column {label_column} out of range for {width} columns"
        )
    data = np.empty((len(raw), width))
    for i, (line_no, row) in enumerate(raw):
        if len(row) != width:
            raise DataFormatError(
                path, line_no, f"expected {width} fields, found {len(row)}"
            )
        for j, cell in enumerate(row):
            value = _parse_finite(cell.strip())
            if value is None:
                raise DataFormatError(
                    path, line_no, f"cell {cell.strip()!r} is not a finite number",
                    column=j + 1,
                )
            data[i, j] = value
    labels = data[:, label_column].copy()
    features = np.delete(data, label_column, axis=1)
    if features.shape[1] == 0:
        raise DataFormatError(path, raw[0][0], "no feature columns remain")
    return Dataset(features=features, labels=labels, source_format="csv")


def write_libsvm(path, features, labels):
    """Write every entry explicitly as idx:val so a read round-trips to
    exact float equality (shortest round-trip decimal via repr)."""
    a = as_dense_matrix(features, "features")
    b = as_vector(labels, "labels", size=a.shape[0])
    with open(path, "w", encoding="utf-8") as fh:
        for label, row in zip(b, a):
            cells = " ".join(f"{j + 1}:{value!r}" for j, value in enumerate(map(float, row)))
            fh.write(f"{float(label)!r} {cells}\n")


def write_csv(path, features, labels, label_column=0):
    """Write labels and features as a headerless numeric CSV with the label
    at ``label_column``, round-tripping to exact float equality."""
    a = as_dense_matrix(features, "features")
    b = as_vector(labels, "labels", size=a.shape[0])
    if not 0 <= label_column <= a.shape[1]:
        raise ValidationError(
            f"label_column {label_column} out of range for {a.shape[1]} feature columns"
        )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        for label, row in zip(b, a):
            cells = [repr(float(v)) for v in row]
            cells.insert(label_column, repr(float(label)))
            writer.writerow(cells)
