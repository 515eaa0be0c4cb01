from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import structlog

from core.types import DataPoint, ModelParams
from costs.spec import CostSpec
from errors import DivergedError, InvalidArgumentError
from models import TrajOptConfig, VictimSpec
from trajopt.rollout import RolloutProblem, validate_rollout_inputs

logger = structlog.get_logger()

WarmStart = Optional[Union[np.ndarray, Sequence[np.ndarray]]]


@dataclass(frozen=True)
class TrajOptResult:
    actions: List[DataPoint]
    objective: float
    initial_objective: float
    iterations_used: int
    converged: bool = False

    @property
    def action_array(self) -> np.ndarray:
        return np.vstack([a.features for a in self.actions])


class ScenarioProgram:
    """Mean rollout objective over m sampled futures with a shared first action.

    Iterates are (m, h, d) arrays whose first rows are kept identical: the
    first-row gradient is averaged and written back to every scenario.
    """

    def __init__(self, problem: RolloutProblem, theta0: np.ndarray, futures: np.ndarray, labels: List[List[Optional[int]]]):
        self.problem = problem
        self.theta0 = theta0
        self.futures = futures
        self.labels = labels
        self.count = futures.shape[0]

    def evaluate(self, actions: np.ndarray) -> Tuple[float, np.ndarray]:
        total = 0.0
        grad = np.empty_like(actions)
        for s in range(self.count):
            value, grad[s] = self.problem.value_and_grad(self.theta0, self.futures[s], self.labels[s], actions[s])
            total += value
        grad /= self.count
        grad[:, 0] = grad[:, 0].sum(axis=0)
        return total / self.count, grad


class AdamDescent:
    """Adaptive-moment descent that keeps the best iterate seen.

    The step size halves after `plateau_patience` iterations without a new
    best; the solve stops once it falls below `min_step_size`.
    """

    def __init__(self, config: TrajOptConfig):
        self.config = config

    def minimize(self, program: ScenarioProgram, start: np.ndarray) -> Tuple[np.ndarray, float, int, bool]:
        cfg = self.config
        x = start.copy()
        value, grad = program.evaluate(x)
        if not np.isfinite(value):
            raise DivergedError("non-finite objective at the starting point", last_finite_actions=None, iteration=0)
        best_x, best_value = x.copy(), value
        first_moment = np.zeros_like(x)
        second_moment = np.zeros_like(x)
        step_size = cfg.step_size
        stale = 0
        iterations = 0
        converged = False

        while iterations < cfg.max_iters:
            if float(np.max(np.abs(grad))) <= cfg.convergence_tol:
                converged = True
                break
            iterations += 1
            first_moment = cfg.beta1 * first_moment + (1.0 - cfg.beta1) * grad
            second_moment = cfg.beta2 * second_moment + (1.0 - cfg.beta2) * grad * grad
            m_hat = first_moment / (1.0 - cfg.beta1 ** iterations)
            v_hat = second_moment / (1.0 - cfg.beta2 ** iterations)
            previous = x
            x = x - step_size * m_hat / (np.sqrt(v_hat) + cfg.epsilon)

            value, grad = program.evaluate(x)
            if not np.isfinite(value) or not np.all(np.isfinite(grad)):
                raise DivergedError(
                    f"non-finite objective at iteration {iterations}",
                    last_finite_actions=previous,
                    iteration=iterations,
                )
            if value < best_value:
                best_x, best_value = x.copy(), value
                stale = 0
            else:
                stale += 1
                if stale >= cfg.plateau_patience:
                    step_size *= 0.5
                    stale = 0
                    if step_size < cfg.min_step_size:
                        break
        return best_x, best_value, iterations, converged


def _warm_candidates(warm_start: WarmStart) -> List[np.ndarray]:
    if warm_start is None:
        return []
    if isinstance(warm_start, np.ndarray):
        return [np.asarray(warm_start, dtype=np.float64)]
    return [np.asarray(guess, dtype=np.float64) for guess in warm_start]


def optimize_scenarios(
    victim: VictimSpec,
    cost: CostSpec,
    theta0: ModelParams,
    scenarios: Sequence[Sequence[DataPoint]],
    config: TrajOptConfig,
    warm_start: WarmStart = None,
) -> TrajOptResult:
    """Plan against several sampled futures at once.

    Every scenario must share its first point (the observed one) and length h.
    `warm_start` is one candidate (h, d) perturbation, or a list of them, added
    to each scenario's futures; the best candidate replaces the zero-perturbation
    start only if it scores lower.
    The returned actions are those of the first scenario.
    """
    if len(scenarios) == 0:
        raise InvalidArgumentError("at least one scenario is required")
    horizon = len(scenarios[0])
    first = scenarios[0][0] if horizon else None
    for futures in scenarios:
        validate_rollout_inputs(victim, theta0, futures, futures)
        if len(futures) != horizon:
            raise InvalidArgumentError("all scenarios must have the same horizon")
        if futures[0].label != first.label or not np.array_equal(futures[0].features, first.features):
            raise InvalidArgumentError("scenarios must share their first point")

    problem = RolloutProblem(victim, cost, config.gamma)
    futures = np.stack([np.vstack([p.features for p in s]) for s in scenarios])
    labels = [[p.label for p in s] for s in scenarios]
    program = ScenarioProgram(problem, theta0.values, futures, labels)

    start = futures.copy()
    initial_objective, _ = program.evaluate(start)
    if not np.isfinite(initial_objective):
        raise DivergedError("non-finite objective at zero perturbation", last_finite_actions=None, iteration=0)
    start_objective = initial_objective
    for guess in _warm_candidates(warm_start):
        if guess.shape != futures.shape[1:]:
            raise InvalidArgumentError(f"warm start shape {guess.shape} does not match {futures.shape[1:]}")
        candidate = futures + guess[None, :, :]
        candidate_objective, _ = program.evaluate(candidate)
        if np.isfinite(candidate_objective) and candidate_objective < start_objective:
            start, start_objective = candidate, candidate_objective

    best, objective, iterations, converged = AdamDescent(config).minimize(program, start)
    if objective > initial_objective:
        best, objective = futures.copy(), initial_objective

    actions = [point.with_features(row) for point, row in zip(scenarios[0], best[0])]
    logger.debug(
        "Trajectory solved",
        horizon=horizon,
        scenarios=len(scenarios),
        iterations=iterations,
        converged=converged,
        objective=objective,
        initial_objective=initial_objective,
    )
    return TrajOptResult(
        actions=actions,
        objective=float(objective),
        initial_objective=float(initial_objective),
        iterations_used=iterations,
        converged=converged,
    )


def optimize_trajectory(
    victim: VictimSpec,
    cost: CostSpec,
    theta0: ModelParams,
    futures: Sequence[DataPoint],
    config: TrajOptConfig,
    warm_start: WarmStart = None,
) -> TrajOptResult:
    return optimize_scenarios(victim, cost, theta0, [futures], config, warm_start=warm_start)
