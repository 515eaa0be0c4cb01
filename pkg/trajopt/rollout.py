from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.discount import validate_gamma
from core.types import DataPoint, ModelParams
from costs.running import RunningCost
from costs.spec import CostSpec
from errors import InvalidArgumentError, LabelError
from models import VictimSpec
from victims.dynamics import check_compatible


class RolloutProblem:
    """Discounted running cost of an action sequence played against fixed futures.

    Works on raw arrays: theta0 shaped like the model, futures and actions as
    (h, d) arrays, labels as a length-h sequence shared by both.
    """

    def __init__(self, victim_spec: VictimSpec, cost_spec: CostSpec, gamma: float):
        self.running = RunningCost(cost_spec, victim_spec)
        self.victim = self.running.victim
        self.nefarious = self.running.nefarious
        self.lam = cost_spec.lam
        self.gamma = validate_gamma(gamma)

    def simulate(self, theta0: np.ndarray, actions: np.ndarray, labels: Sequence[Optional[int]]) -> List[np.ndarray]:
        thetas = [theta0]
        for a, y in zip(actions, labels):
            thetas.append(self.victim.step(thetas[-1], a, y))
        return thetas

    def value(self, theta0: np.ndarray, futures: np.ndarray, labels: Sequence[Optional[int]], actions: np.ndarray) -> float:
        total = 0.0
        theta = theta0
        for tau in range(actions.shape[0]):
            cost, theta = self.running.value(theta, futures[tau], actions[tau], labels[tau])
            total += self.gamma ** tau * cost
        return total

    def value_and_grad(
        self, theta0: np.ndarray, futures: np.ndarray, labels: Sequence[Optional[int]], actions: np.ndarray
    ) -> Tuple[float, np.ndarray]:
        horizon = actions.shape[0]
        weights = self.gamma ** np.arange(horizon)
        perturbations = actions - futures
        total = float(weights @ np.einsum("td,td->t", perturbations, perturbations))
        grad = 2.0 * weights[:, None] * perturbations
        if self.lam == 0.0:
            return total, grad

        thetas = self.simulate(theta0, actions, labels)
        for tau in range(horizon):
            total += weights[tau] * self.lam * self.nefarious.value(thetas[tau + 1])

        # adjoint of theta_{tau+1} carried backwards through the victim update
        adjoint = np.zeros_like(theta0)
        for tau in range(horizon - 1, -1, -1):
            cotangent = adjoint + (weights[tau] * self.lam) * self.nefarious.gradient(thetas[tau + 1])
            adjoint, grad_a = self.victim.vjp(thetas[tau], actions[tau], labels[tau], cotangent)
            grad[tau] += grad_a
        return total, grad


def validate_rollout_inputs(
    victim: VictimSpec, theta0: ModelParams, futures: Sequence[DataPoint], actions: Sequence[DataPoint]
) -> None:
    if len(futures) == 0:
        raise InvalidArgumentError("horizon must be at least 1")
    if len(futures) != len(actions):
        raise InvalidArgumentError(f"{len(futures)} futures but {len(actions)} actions")
    for clean, action in zip(futures, actions):
        if clean.label != action.label:
            raise LabelError("label perturbation disabled")
        check_compatible(victim, theta0, action)


def _stack(points: Sequence[DataPoint]) -> np.ndarray:
    return np.vstack([p.features for p in points])


def rollout_objective(
    victim: VictimSpec,
    cost: CostSpec,
    theta0: ModelParams,
    futures: Sequence[DataPoint],
    actions: Sequence[DataPoint],
    gamma: float,
) -> float:
    validate_rollout_inputs(victim, theta0, futures, actions)
    problem = RolloutProblem(victim, cost, gamma)
    return problem.value(theta0.values, _stack(futures), [p.label for p in futures], _stack(actions))


def rollout_gradient(
    victim: VictimSpec,
    cost: CostSpec,
    theta0: ModelParams,
    futures: Sequence[DataPoint],
    actions: Sequence[DataPoint],
    gamma: float,
) -> List[np.ndarray]:
    validate_rollout_inputs(victim, theta0, futures, actions)
    problem = RolloutProblem(victim, cost, gamma)
    _, grad = problem.value_and_grad(theta0.values, _stack(futures), [p.label for p in futures], _stack(actions))
    return list(grad)
