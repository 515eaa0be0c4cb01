from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.types import DataPoint
from errors import InvalidArgumentError, ShapeMismatchError


@dataclass(frozen=True, eq=False)
class ZScoreStats:
    mean: np.ndarray
    std: np.ndarray


@dataclass(frozen=True, eq=False)
class PCAProjection:
    mean: np.ndarray
    basis: np.ndarray
    eigenvalues: np.ndarray

    @property
    def d_target(self) -> int:
        return self.basis.shape[0]


@dataclass(frozen=True, eq=False)
class PreprocessReport:
    input_dim: int
    output_dim: int
    zscore: ZScoreStats
    projection: Optional[PCAProjection]
    final_zscore: Optional[ZScoreStats]


def _as_matrix(points: Sequence[DataPoint]) -> np.ndarray:
    dims = {p.dim for p in points}
    if len(dims) > 1:
        raise ShapeMismatchError(f"points have mixed dimensions {sorted(dims)}")
    return np.vstack([p.features for p in points])


def zscore_fit_apply(points: Sequence[DataPoint]) -> Tuple[List[DataPoint], ZScoreStats]:
    if len(points) < 2:
        raise InvalidArgumentError("z-scoring needs at least 2 points")
    X = _as_matrix(points)
    mean = X.mean(axis=0)
    # population standard deviation
    std = X.std(axis=0)
    constant = std <= 1e-12 * (1.0 + np.abs(mean))
    scale = np.where(constant, 1.0, std)
    Z = np.where(constant, 0.0, (X - mean) / scale)
    normalized = [DataPoint(features=row, label=p.label) for row, p in zip(Z, points)]
    return normalized, ZScoreStats(mean=mean, std=np.where(constant, 0.0, std))


def pca_fit(points: Sequence[DataPoint], d_target: int) -> PCAProjection:
    X = _as_matrix(points)
    n, d = X.shape
    if not 1 <= d_target <= d:
        raise InvalidArgumentError(f"d_target must be in [1, {d}], got {d_target}")
    if n < d_target + 1:
        raise InvalidArgumentError(f"PCA to {d_target} dimensions needs at least {d_target + 1} points, got {n}")
    mean = X.mean(axis=0)
    centered = X - mean
    covariance = centered.T @ centered / (n - 1)
    eigenvalues, eigenvectors = np.linalg.eigh(covariance)
    order = np.argsort(eigenvalues)[::-1][:d_target]
    eigenvalues = eigenvalues[order]
    basis = eigenvectors[:, order].T
    scale = max(float(eigenvalues[0]), np.finfo(np.float64).tiny)
    if eigenvalues[-1] <= 1e-10 * scale:
        raise InvalidArgumentError("insufficient rank")
    # fix each row's sign so its largest-magnitude entry is positive
    pivots = np.argmax(np.abs(basis), axis=1)
    signs = np.sign(basis[np.arange(d_target), pivots])
    basis = basis * signs[:, None]
    return PCAProjection(mean=mean, basis=basis, eigenvalues=eigenvalues)


def pca_apply(proj: PCAProjection, point: DataPoint) -> DataPoint:
    if point.dim != proj.mean.shape[0]:
        raise ShapeMismatchError(f"projection expects {proj.mean.shape[0]}-d points, got {point.dim}")
    return DataPoint(features=proj.basis @ (point.features - proj.mean), label=point.label)


def preprocess_points(points: Sequence[DataPoint], d_target: int) -> Tuple[List[DataPoint], PreprocessReport]:
    """z-score, then PCA down to d_target when the data is wider, then z-score again."""
    input_dim = points[0].dim if points else 0
    normalized, stats = zscore_fit_apply(points)
    if input_dim <= d_target:
        return normalized, PreprocessReport(input_dim, input_dim, stats, None, None)
    projection = pca_fit(normalized, d_target)
    projected = [pca_apply(projection, p) for p in normalized]
    renormalized, final_stats = zscore_fit_apply(projected)
    return renormalized, PreprocessReport(input_dim, d_target, stats, projection, final_stats)
