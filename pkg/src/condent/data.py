"""Mixed-pair sample container: continuous features with categorical labels."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .spatial import validate_points


@dataclass(frozen=True)
class Dataset:
    """n feature vectors in R^d paired with labels from an alphabet of size m.

    ``label_names`` maps label ids back to their external names (e.g. CSV
    strings); ids are assigned in first-appearance order by the ingesters.
    """

    features: np.ndarray
    labels: np.ndarray
    m: int
    label_names: tuple[str, ...] | None = field(default=None)

    def __post_init__(self):
        pts = validate_points(self.features)
        labels = np.ascontiguousarray(self.labels, dtype=np.intp)
        if labels.ndim != 1 or labels.shape[0] != pts.shape[0]:
            raise InvalidInputError("labels must be a vector with one entry per feature row")
        if self.m < 1:
            raise InvalidInputError(f"label alphabet size must be >= 1, got {self.m}")
        if labels.size and (labels.min() < 0 or labels.max() >= self.m):
            raise InvalidInputError(f"label ids must lie in [0, {self.m})")
        if self.label_names is not None and len(self.label_names) != self.m:
            raise InvalidInputError("label_names must have one entry per label id")
        object.__setattr__(self, "features", pts)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @classmethod
    def from_arrays(cls, features, labels, m: int | None = None,
                    label_names=None) -> "Dataset":
        """Build a dataset, deriving m from the data when not declared.

        When m is derived, every id in [0, m) must actually occur.
        """
        labels = np.ascontiguousarray(labels, dtype=np.intp)
        if m is None:
            if labels.size == 0:
                raise InvalidInputError("cannot derive label alphabet from empty labels")
            m = int(labels.max()) + 1
            present = np.unique(labels)
            if len(present) != m:
                missing = sorted(set(range(m)) - set(present.tolist()))
                raise InvalidInputError(
                    f"label ids {missing} missing from data; declare m explicitly")
        return cls(features=np.asarray(features, dtype=np.float64), labels=labels,
                   m=m, label_names=tuple(label_names) if label_names else None)

    def project(self, feature: int) -> "Dataset":
        """One-column projection (X_j, Y), used for marginal MI ranking."""
        if not 0 <= feature < self.d:
            raise InvalidInputError(f"feature index {feature} out of range [0, {self.d})")
        return Dataset(features=self.features[:, feature:feature + 1].copy(),
                       labels=self.labels, m=self.m, label_names=self.label_names)
