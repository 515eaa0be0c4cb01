from dataclasses import dataclass
from typing import Optional

import numpy as np

from errors import InvalidArgumentError, LabelError, ShapeMismatchError
from models import VictimKind


def _frozen_array(values, ndim: int) -> np.ndarray:
    array = np.array(values, dtype=np.float64)
    if array.ndim != ndim:
        raise ShapeMismatchError(f"expected a {ndim}-d array, got shape {array.shape}")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class DataPoint:
    """One environment sample: features plus an optional {-1, +1} label."""

    features: np.ndarray
    label: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "features", _frozen_array(np.ravel(self.features), 1))
        if self.label is not None:
            if self.label not in (-1, 1):
                raise LabelError(f"label must be -1 or +1, got {self.label}")
            object.__setattr__(self, "label", int(self.label))

    @property
    def dim(self) -> int:
        return self.features.shape[0]

    @property
    def labeled(self) -> bool:
        return self.label is not None

    def with_features(self, features) -> "DataPoint":
        return DataPoint(features=features, label=self.label)

    def without_label(self) -> "DataPoint":
        return DataPoint(features=self.features)


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Victim model: a weight vector (logreg) or k centroid rows (soft k-means)."""

    kind: VictimKind
    values: np.ndarray

    def __post_init__(self):
        ndim = 1 if self.kind == VictimKind.LOGREG else 2
        values = _frozen_array(self.values, ndim)
        if values.size == 0:
            raise ShapeMismatchError("model parameters must be nonempty")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("model parameters must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def logreg(cls, weights) -> "ModelParams":
        return cls(kind=VictimKind.LOGREG, values=weights)

    @classmethod
    def kmeans(cls, centroids) -> "ModelParams":
        return cls(kind=VictimKind.SOFT_KMEANS, values=centroids)

    @property
    def dim(self) -> int:
        return self.values.shape[-1]

    @property
    def k(self) -> int:
        return 1 if self.kind == VictimKind.LOGREG else self.values.shape[0]

    @property
    def shape(self) -> tuple:
        return self.values.shape

    def flatten(self) -> np.ndarray:
        return self.values.reshape(-1)

    def replace(self, values) -> "ModelParams":
        return ModelParams(kind=self.kind, values=values)


@dataclass(frozen=True, eq=False)
class ControlState:
    """MDP state s_t = [theta_t, z_t] at step t."""

    model: ModelParams
    incoming: DataPoint
    step: int

    def __post_init__(self):
        if self.incoming.dim != self.model.dim:
            raise ShapeMismatchError(
                f"incoming point has dimension {self.incoming.dim}, model has {self.model.dim}"
            )
        if self.step < 0:
            raise InvalidArgumentError("step must be nonnegative")
