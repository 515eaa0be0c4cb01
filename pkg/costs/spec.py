from dataclasses import dataclass
from typing import Union

import numpy as np

from core.types import DataPoint, ModelParams
from errors import InvalidArgumentError, ShapeMismatchError
from models import CostConfig, NefariousKind, NefariousMetric, ParamSpec, VictimKind, VictimSpec


@dataclass(frozen=True)
class Targeted:
    target: ModelParams


@dataclass(frozen=True)
class Aversion:
    anchor: ModelParams


@dataclass(frozen=True)
class Backdoor:
    trigger: DataPoint


Nefarious = Union[Targeted, Aversion, Backdoor]


@dataclass(frozen=True)
class CostSpec:
    lam: float
    nefarious: Nefarious
    metric: NefariousMetric = NefariousMetric.SQUARED_DIST
    perturb_labels: bool = False

    def __post_init__(self):
        if self.lam < 0:
            raise InvalidArgumentError(f"lambda must be nonnegative, got {self.lam}")
        if self.perturb_labels:
            raise InvalidArgumentError("label perturbation disabled")

    def check_victim(self, victim: VictimSpec) -> None:
        goal = self.nefarious
        if isinstance(goal, (Targeted, Aversion)):
            reference = goal.target if isinstance(goal, Targeted) else goal.anchor
            if reference.kind != victim.kind or reference.shape != victim.param_shape:
                raise ShapeMismatchError(
                    f"attack reference model {reference.kind.value}{reference.shape} "
                    f"does not match victim {victim.kind.value}{victim.param_shape}"
                )
        if isinstance(goal, Targeted) and self.metric == NefariousMetric.COSINE_SIM:
            if victim.kind != VictimKind.LOGREG:
                raise InvalidArgumentError("cosine_sim metric requires the logreg victim")
        if isinstance(goal, Backdoor):
            if victim.kind != VictimKind.LOGREG:
                raise InvalidArgumentError("backdoor cost requires the logreg victim")
            if goal.trigger.dim != victim.d or not goal.trigger.labeled:
                raise ShapeMismatchError("backdoor trigger must be a labeled point of the victim dimension")


def resolve_params(spec: ParamSpec, victim: VictimSpec, rng: np.random.Generator) -> ModelParams:
    if isinstance(spec, str):
        values = rng.standard_normal(victim.param_shape)
    else:
        values = np.asarray(spec, dtype=np.float64)
        if values.shape != victim.param_shape:
            raise ShapeMismatchError(f"parameter shape {values.shape} does not match victim {victim.param_shape}")
    return ModelParams(kind=victim.kind, values=values)


def resolve_cost_spec(config: CostConfig, victim: VictimSpec, rng: np.random.Generator) -> CostSpec:
    if config.nefarious == NefariousKind.TARGETED:
        goal: Nefarious = Targeted(target=resolve_params(config.target, victim, rng))
    elif config.nefarious == NefariousKind.AVERSION:
        goal = Aversion(anchor=resolve_params(config.anchor, victim, rng))
    else:
        goal = Backdoor(trigger=DataPoint(features=config.trigger_features, label=config.trigger_label))
    spec = CostSpec(lam=config.lambda_, nefarious=goal, metric=config.metric)
    spec.check_victim(victim)
    return spec
