import math
from typing import List, Optional, Sequence

import structlog

from attackers.base import Attacker
from core.types import ControlState, DataPoint, ModelParams
from costs.spec import CostSpec
from errors import InvalidArgumentError
from models import PolicyKind, TrajOptConfig, VictimSpec
from trajopt.optimizer import optimize_trajectory

logger = structlog.get_logger()


def clairvoyant_config(opt: TrajOptConfig, episode_length: int, iter_scale: Optional[float] = None) -> TrajOptConfig:
    # One full-horizon solve gets the iterations of T/h MPC solves.
    scale = iter_scale if iter_scale is not None else max(1.0, episode_length / opt.horizon)
    return opt.model_copy(update={"horizon": episode_length, "max_iters": int(math.ceil(opt.max_iters * scale))})


def act_clairvoyant_precompute(
    victim: VictimSpec,
    cost: CostSpec,
    theta0: ModelParams,
    full_stream: Sequence[DataPoint],
    opt: TrajOptConfig,
) -> List[DataPoint]:
    result = optimize_trajectory(victim, cost, theta0, full_stream, opt)
    logger.info(
        "Clairvoyant plan computed",
        horizon=len(full_stream),
        objective=result.objective,
        initial_objective=result.initial_objective,
        iterations=result.iterations_used,
        converged=result.converged,
    )
    return result.actions


class ClairvoyantAttacker(Attacker):
    """Knows z_{0:T-1} upfront and replays one full-horizon plan."""

    policy = PolicyKind.CLAIRVOYANT

    def __init__(
        self,
        victim: VictimSpec,
        cost: CostSpec,
        config: TrajOptConfig,
        theta0: ModelParams,
        full_stream: Sequence[DataPoint],
        episode_length: Optional[int] = None,
    ):
        episode_length = len(full_stream) if episode_length is None else episode_length
        if len(full_stream) < episode_length:
            raise InvalidArgumentError(
                f"clairvoyant stream has {len(full_stream)} points, episode needs {episode_length}"
            )
        self.stream = list(full_stream[:episode_length])
        self.plan = act_clairvoyant_precompute(victim, cost, theta0, self.stream, config)

    def act(self, state: ControlState) -> DataPoint:
        if state.step >= len(self.plan):
            raise InvalidArgumentError(f"step {state.step} is past the clairvoyant horizon {len(self.plan)}")
        expected = self.stream[state.step]
        if expected.label != state.incoming.label or not (expected.features == state.incoming.features).all():
            raise InvalidArgumentError(f"observed point at step {state.step} differs from the known stream")
        return self.plan[state.step]
