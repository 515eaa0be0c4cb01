import math
from typing import Optional, Tuple

import numpy as np

from core.types import DataPoint
from errors import LabelError, ShapeMismatchError


def logistic_weight(margin: float) -> float:
    # 1 / (1 + exp(margin)) without overflow for large |margin|
    if margin >= 0:
        e = math.exp(-margin)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(margin))


class LogRegVictim:
    """Online logistic regression: one gradient step on the log likelihood per point."""

    def __init__(self, eta: float):
        self.eta = float(eta)

    def step(self, theta: np.ndarray, x: np.ndarray, y: Optional[int]) -> np.ndarray:
        if y is None:
            raise LabelError("unlabeled point for supervised victim")
        c = logistic_weight(y * float(theta @ x))
        return theta + (self.eta * y * c) * x

    def vjp(
        self, theta: np.ndarray, x: np.ndarray, y: Optional[int], v: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray]:
        if y is None:
            raise LabelError("unlabeled point for supervised victim")
        c = logistic_weight(y * float(theta @ x))
        dc = -c * (1.0 - c)
        vx = float(v @ x)
        grad_theta = v + (self.eta * dc * vx) * x
        grad_x = (self.eta * y * c) * v + (self.eta * dc * vx) * theta
        return grad_theta, grad_x


def logreg_update(theta, point: DataPoint, eta: float) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    if not point.labeled:
        raise LabelError("unlabeled point for supervised victim")
    if theta.shape != (point.dim,):
        raise ShapeMismatchError(f"weights have shape {theta.shape}, point has dimension {point.dim}")
    return LogRegVictim(eta).step(theta, point.features, point.label)
