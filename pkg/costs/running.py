from typing import Tuple

import numpy as np

from core.types import DataPoint, ModelParams
from costs.nefarious import NefariousCost
from costs.spec import CostSpec
from errors import LabelError
from models import VictimSpec
from victims.dynamics import build_victim, check_compatible


class RunningCost:
    """g(theta, z, a) = lambda * g_nef(f(theta, a)) + ||a - z||^2 on raw arrays.

    The nefarious term is charged on the post-update model."""

    def __init__(self, spec: CostSpec, victim_spec: VictimSpec):
        spec.check_victim(victim_spec)
        self.spec = spec
        self.lam = spec.lam
        self.victim = build_victim(victim_spec)
        self.nefarious = NefariousCost(spec, victim_spec.kind)

    def value(self, theta: np.ndarray, z: np.ndarray, a: np.ndarray, y) -> Tuple[float, np.ndarray]:
        theta_next = self.victim.step(theta, a, y)
        delta = a - z
        cost = float(delta @ delta)
        if self.lam != 0.0:
            cost += self.lam * self.nefarious.value(theta_next)
        return cost, theta_next

    def gradient_action(self, theta: np.ndarray, z: np.ndarray, a: np.ndarray, y) -> np.ndarray:
        grad = 2.0 * (a - z)
        if self.lam != 0.0:
            theta_next = self.victim.step(theta, a, y)
            cotangent = self.lam * self.nefarious.gradient(theta_next)
            _, grad_a = self.victim.vjp(theta, a, y, cotangent)
            grad = grad + grad_a
        return grad


def _check_labels(clean: DataPoint, action: DataPoint) -> None:
    if clean.label != action.label:
        raise LabelError("label perturbation disabled")


def running_cost(
    spec: CostSpec, victim: VictimSpec, theta: ModelParams, clean: DataPoint, action: DataPoint
) -> float:
    _check_labels(clean, action)
    check_compatible(victim, theta, action)
    cost, _ = RunningCost(spec, victim).value(theta.values, clean.features, action.features, action.label)
    return cost


def running_cost_gradient(
    spec: CostSpec, victim: VictimSpec, theta: ModelParams, clean: DataPoint, action: DataPoint
) -> np.ndarray:
    _check_labels(clean, action)
    check_compatible(victim, theta, action)
    return RunningCost(spec, victim).gradient_action(theta.values, clean.features, action.features, action.label)
