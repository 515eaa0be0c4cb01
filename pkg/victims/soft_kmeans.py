from typing import Optional, Tuple

import numpy as np

from core.types import DataPoint
from errors import InvalidArgumentError, ShapeMismatchError


def softmax(values) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    if values.size == 0:
        raise InvalidArgumentError("softmax of an empty vector")
    shifted = np.exp(values - values.max())
    return shifted / shifted.sum()


class SoftKMeansVictim:
    """Online soft k-means: every centroid moves toward the point, weighted by
    softmax(-squared distance)."""

    def __init__(self, eta: float):
        self.eta = float(eta)

    def responsibilities(self, centroids: np.ndarray, a: np.ndarray) -> np.ndarray:
        diff = a - centroids
        return softmax(-np.einsum("kd,kd->k", diff, diff))

    def step(self, centroids: np.ndarray, a: np.ndarray, y: Optional[int] = None) -> np.ndarray:
        diff = a - centroids
        r = softmax(-np.einsum("kd,kd->k", diff, diff))
        return centroids + self.eta * r[:, None] * diff

    def vjp(
        self, centroids: np.ndarray, a: np.ndarray, y: Optional[int], v: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray]:
        diff = a - centroids
        r = softmax(-np.einsum("kd,kd->k", diff, diff))
        # cotangent on the responsibilities, then back through the softmax
        dr = self.eta * np.einsum("kd,kd->k", v, diff)
        w = r * (dr - r @ dr)
        grad_centroids = v * (1.0 - self.eta * r)[:, None] + 2.0 * w[:, None] * diff
        grad_a = self.eta * (r @ v) - 2.0 * (w @ diff)
        return grad_centroids, grad_a


def soft_kmeans_update(centroids, point: DataPoint, eta: float) -> np.ndarray:
    centroids = np.asarray(centroids, dtype=np.float64)
    if centroids.ndim != 2 or centroids.shape[0] < 1:
        raise ShapeMismatchError(f"centroids must be a (k, d) array with k >= 1, got {centroids.shape}")
    if centroids.shape[1] != point.dim:
        raise ShapeMismatchError(f"centroids have dimension {centroids.shape[1]}, point has {point.dim}")
    return SoftKMeansVictim(eta).step(centroids, point.features)
