import structlog

from attackers.base import Attacker
from core.types import ControlState, DataPoint
from costs.spec import CostSpec
from models import PolicyKind, TrajOptConfig, VictimSpec
from trajopt.optimizer import optimize_trajectory

logger = structlog.get_logger()


class GreedyAttacker(Attacker):
    """Minimizes the current step's running cost only: a one-step plan on [z_t]."""

    policy = PolicyKind.GREEDY

    def __init__(self, victim: VictimSpec, cost: CostSpec, config: TrajOptConfig):
        self.victim = victim
        self.cost = cost
        self.config = config.model_copy(update={"horizon": 1})

    def act(self, state: ControlState) -> DataPoint:
        result = optimize_trajectory(self.victim, self.cost, state.model, [state.incoming], self.config)
        logger.debug("Greedy action", step=state.step, objective=result.objective, iterations=result.iterations_used)
        return result.actions[0]


def act_greedy(state: ControlState, victim: VictimSpec, cost: CostSpec, opt: TrajOptConfig) -> DataPoint:
    return GreedyAttacker(victim, cost, opt).act(state)
