from typing import List, Optional, Sequence

import numpy as np
import structlog

from attackers.base import Attacker
from core.types import ControlState, DataPoint
from costs.spec import CostSpec
from datastream.buffer import EmpiricalBuffer
from models import PolicyKind, TrajOptConfig, VictimSpec
from trajopt.optimizer import optimize_scenarios

logger = structlog.get_logger()


class NlpMpcAttacker(Attacker):
    """Receding-horizon attacker.

    Each step it plans h actions against futures [z_t, b_1, ..., b_{h-1}] with
    the b's drawn from the empirical buffer, and plays only the first one. The
    harness owns the buffer and pushes z_t before calling act.

    With `reuse_futures` the sampled tail rolls forward between steps: b_1 is
    dropped, one fresh draw is appended, and the shifted previous plan stays
    aligned with the points it was solved for.
    """

    policy = PolicyKind.NLP

    def __init__(
        self,
        victim: VictimSpec,
        cost: CostSpec,
        config: TrajOptConfig,
        buffer: EmpiricalBuffer,
        rng: np.random.Generator,
    ):
        self.victim = victim
        self.cost = cost
        self.config = config
        self.buffer = buffer
        self.rng = rng
        self._last_plan: Optional[np.ndarray] = None
        self._last_actions: Optional[np.ndarray] = None
        self._scenarios: Optional[List[List[DataPoint]]] = None

    def sample_futures(self, incoming: DataPoint, previous_tail: Optional[Sequence[DataPoint]] = None) -> List[DataPoint]:
        horizon = self.config.horizon
        if horizon == 1:
            return [incoming]
        if previous_tail is None or len(previous_tail) != horizon - 1:
            return [incoming] + self.buffer.sample_trajectory(horizon - 1, self.rng)
        return [incoming] + list(previous_tail[1:]) + self.buffer.sample_trajectory(1, self.rng)

    def _next_scenarios(self, incoming: DataPoint) -> List[List[DataPoint]]:
        count = self.config.num_trajectories
        if not self.config.reuse_futures or self._scenarios is None:
            return [self.sample_futures(incoming) for _ in range(count)]
        return [self.sample_futures(incoming, previous[1:]) for previous in self._scenarios]

    def _shifted_plan(self) -> Optional[np.ndarray]:
        if not self.config.warm_start or self._last_plan is None:
            return None
        shifted = np.zeros_like(self._last_plan)
        shifted[:-1] = self._last_plan[1:]
        return shifted

    def _warm_starts(self, incoming: DataPoint) -> Optional[List[np.ndarray]]:
        shifted = self._shifted_plan()
        if shifted is None:
            return None
        candidates = [shifted]
        if shifted.shape[0] > 1:
            # keep the previously planned action itself for the observed point
            kept = shifted.copy()
            kept[0] = self._last_actions[1] - incoming.features
            candidates.append(kept)
        return candidates

    def act(self, state: ControlState) -> DataPoint:
        scenarios = self._next_scenarios(state.incoming)
        result = optimize_scenarios(
            self.victim,
            self.cost,
            state.model,
            scenarios,
            self.config,
            warm_start=self._warm_starts(state.incoming),
        )
        futures = np.vstack([p.features for p in scenarios[0]])
        self._last_actions = result.action_array
        self._last_plan = self._last_actions - futures
        self._scenarios = scenarios
        logger.debug(
            "MPC plan",
            step=state.step,
            buffer_size=len(self.buffer),
            objective=result.objective,
            initial_objective=result.initial_objective,
            iterations=result.iterations_used,
        )
        return result.actions[0]


def act_nlp_mpc(
    state: ControlState,
    victim: VictimSpec,
    cost: CostSpec,
    opt: TrajOptConfig,
    buffer: EmpiricalBuffer,
    rng: np.random.Generator,
) -> DataPoint:
    return NlpMpcAttacker(victim, cost, opt, buffer, rng).act(state)
