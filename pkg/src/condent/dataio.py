"""CSV dataset ingestion and emission.

Format: one header row naming the feature columns and the label column;
feature cells are finite decimals, label cells arbitrary strings.  Label
ids are assigned in first-appearance order.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .data import Dataset
from .errors import InvalidInputError


def ingest_csv(path, label_column: str) -> Dataset:
    path = Path(path)
    if not path.exists():
        raise InvalidInputError(f"no such file: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InvalidInputError(f"{path}: empty file") from None
        if label_column not in header:
            raise InvalidInputError(
                f"{path}: label column {label_column!r} not found in header {header}")
        label_idx = header.index(label_column)
        feature_cols = [(i, name) for i, name in enumerate(header) if i != label_idx]
        if not feature_cols:
            raise InvalidInputError(f"{path}: no feature columns besides the label")

        rows = []
        labels = []
        label_ids: dict[str, int] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise InvalidInputError(
                    f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
            feats = []
            for col, name in feature_cols:
                cell = row[col]
                try:
                    value = float(cell)
                except ValueError:
                    raise InvalidInputError(
                        f"{path}:{lineno}: column {name!r}: non-numeric value {cell!r}") from None
                if not math.isfinite(value):
                    raise InvalidInputError(
                        f"{path}:{lineno}: column {name!r}: non-finite value {cell!r}")
                feats.append(value)
            rows.append(feats)
            lab = row[label_idx]
            labels.append(label_ids.setdefault(lab, len(label_ids)))

    if len(rows) < 2:
        raise InvalidInputError(f"{path}: need at least 2 data rows, got {len(rows)}")
    names = tuple(sorted(label_ids, key=label_ids.get))
    return Dataset(features=np.asarray(rows, dtype=np.float64),
                   labels=np.asarray(labels, dtype=np.intp),
                   m=len(names), label_names=names)


def write_dataset_csv(dataset: Dataset, path, label_column: str = "y") -> None:
    path = Path(path)
    names = dataset.label_names or tuple(str(y) for y in range(dataset.m))
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{j + 1}" for j in range(dataset.d)] + [label_column])
        for feats, lab in zip(dataset.features, dataset.labels):
            writer.writerow([repr(float(v)) for v in feats] + [names[lab]])
