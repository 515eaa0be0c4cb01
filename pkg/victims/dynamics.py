from typing import Tuple, Union

import numpy as np

from core.types import DataPoint, ModelParams
from errors import LabelError, ShapeMismatchError
from models import VictimKind, VictimSpec
from victims.logreg import LogRegVictim
from victims.soft_kmeans import SoftKMeansVictim

Victim = Union[LogRegVictim, SoftKMeansVictim]


def build_victim(spec: VictimSpec) -> Victim:
    if spec.kind == VictimKind.LOGREG:
        return LogRegVictim(spec.eta)
    return SoftKMeansVictim(spec.eta)


def check_compatible(spec: VictimSpec, theta: ModelParams, point: DataPoint) -> None:
    if theta.kind != spec.kind:
        raise ShapeMismatchError(f"model is {theta.kind.value}, victim is {spec.kind.value}")
    if theta.shape != spec.param_shape:
        raise ShapeMismatchError(f"model shape {theta.shape} does not match victim shape {spec.param_shape}")
    if point.dim != spec.d:
        raise ShapeMismatchError(f"point has dimension {point.dim}, victim expects {spec.d}")
    if spec.supervised and not point.labeled:
        raise LabelError("unlabeled point for supervised victim")


def victim_update(spec: VictimSpec, theta: ModelParams, action: DataPoint) -> ModelParams:
    check_compatible(spec, theta, action)
    victim = build_victim(spec)
    # ModelParams rejects non-finite values
    return theta.replace(victim.step(theta.values, action.features, action.label))


def victim_vjp(
    spec: VictimSpec, theta: ModelParams, action: DataPoint, cotangent
) -> Tuple[np.ndarray, np.ndarray]:
    check_compatible(spec, theta, action)
    cotangent = np.asarray(cotangent, dtype=np.float64)
    if cotangent.shape != theta.shape:
        raise ShapeMismatchError(f"cotangent shape {cotangent.shape} does not match model shape {theta.shape}")
    return build_victim(spec).vjp(theta.values, action.features, action.label, cotangent)
