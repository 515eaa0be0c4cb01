import numpy as np

from core.types import ModelParams
from costs.spec import Aversion, Backdoor, CostSpec, Targeted
from errors import InvalidArgumentError, ShapeMismatchError
from models import NefariousMetric, VictimKind
from victims.logreg import logistic_weight


def cosine(a, b) -> float:
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"cosine of vectors with shapes {a.shape} and {b.shape}")
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise InvalidArgumentError("cosine undefined at zero")
    return float(np.clip(a @ b / (norm_a * norm_b), -1.0, 1.0))


class NefariousCost:
    """g_nef evaluated on raw parameter arrays, with its gradient."""

    def __init__(self, spec: CostSpec, kind: VictimKind):
        goal = spec.nefarious
        if isinstance(goal, Targeted) and spec.metric == NefariousMetric.COSINE_SIM and kind != VictimKind.LOGREG:
            raise InvalidArgumentError("cosine_sim metric requires the logreg victim")
        if isinstance(goal, Backdoor) and kind != VictimKind.LOGREG:
            raise InvalidArgumentError("backdoor cost requires the logreg victim")
        self.goal = goal
        self.metric = spec.metric

    def value(self, theta: np.ndarray) -> float:
        goal = self.goal
        if isinstance(goal, Targeted):
            if self.metric == NefariousMetric.COSINE_SIM:
                return -cosine(theta, goal.target.values)
            diff = theta - goal.target.values
            return float(np.sum(diff * diff))
        if isinstance(goal, Aversion):
            diff = theta - goal.anchor.values
            return -float(np.sum(diff * diff))
        margin = goal.trigger.label * float(theta @ goal.trigger.features)
        return float(np.logaddexp(0.0, -margin))

    def gradient(self, theta: np.ndarray) -> np.ndarray:
        goal = self.goal
        if isinstance(goal, Targeted):
            if self.metric == NefariousMetric.COSINE_SIM:
                target = goal.target.values
                norm_theta = float(np.linalg.norm(theta))
                norm_target = float(np.linalg.norm(target))
                if norm_theta == 0.0 or norm_target == 0.0:
                    raise InvalidArgumentError("cosine undefined at zero")
                cos = float(theta @ target) / (norm_theta * norm_target)
                return -(target / (norm_theta * norm_target) - cos * theta / norm_theta**2)
            return 2.0 * (theta - goal.target.values)
        if isinstance(goal, Aversion):
            return -2.0 * (theta - goal.anchor.values)
        trigger = goal.trigger
        margin = trigger.label * float(theta @ trigger.features)
        return -trigger.label * logistic_weight(margin) * trigger.features


def nefarious_cost(spec: CostSpec, next_model: ModelParams) -> float:
    _check_reference_shape(spec, next_model)
    return NefariousCost(spec, next_model.kind).value(next_model.values)


def nefarious_gradient(spec: CostSpec, next_model: ModelParams) -> np.ndarray:
    _check_reference_shape(spec, next_model)
    return NefariousCost(spec, next_model.kind).gradient(next_model.values)


def _check_reference_shape(spec: CostSpec, model: ModelParams) -> None:
    goal = spec.nefarious
    if isinstance(goal, Targeted):
        reference = goal.target
    elif isinstance(goal, Aversion):
        reference = goal.anchor
    else:
        if model.kind != VictimKind.LOGREG:
            raise InvalidArgumentError("backdoor cost requires the logreg victim")
        if goal.trigger.dim != model.dim:
            raise ShapeMismatchError("backdoor trigger dimension does not match the model")
        return
    if reference.shape != model.shape:
        raise ShapeMismatchError(f"reference shape {reference.shape} does not match model shape {model.shape}")
