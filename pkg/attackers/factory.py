from typing import Sequence

import numpy as np

from attackers.base import Attacker
from attackers.clairvoyant_attacker import ClairvoyantAttacker, clairvoyant_config
from attackers.greedy_attacker import GreedyAttacker
from attackers.nlp_attacker import NlpMpcAttacker
from attackers.null_attacker import NullAttacker
from core.types import DataPoint, ModelParams
from costs.spec import CostSpec
from datastream.buffer import EmpiricalBuffer
from models import EpisodeConfig, PolicyKind


def build_attacker(
    config: EpisodeConfig,
    cost: CostSpec,
    theta0: ModelParams,
    stream: Sequence[DataPoint],
    buffer: EmpiricalBuffer,
    rng: np.random.Generator,
) -> Attacker:
    planner = config.planner_config()
    if config.policy == PolicyKind.NULL:
        return NullAttacker()
    if config.policy == PolicyKind.GREEDY:
        return GreedyAttacker(config.victim, cost, planner)
    if config.policy == PolicyKind.NLP:
        return NlpMpcAttacker(config.victim, cost, planner, buffer, rng)
    return ClairvoyantAttacker(
        config.victim,
        cost,
        clairvoyant_config(planner, config.T, config.clairvoyant_iter_scale),
        theta0,
        stream,
        episode_length=config.T,
    )
