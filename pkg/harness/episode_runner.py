import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import structlog

from attackers.factory import build_attacker
from core.discount import validate_gamma
from core.rng import RngStream, rng_fork
from core.types import ControlState, DataPoint, ModelParams
from costs.running import RunningCost
from costs.spec import CostSpec, resolve_cost_spec, resolve_params
from datastream.buffer import EmpiricalBuffer
from datastream.environment import build_environment, sample_stream
from errors import EpisodeError, LabelError
from models import EpisodeConfig, PolicyKind, VictimSpec
from victims.dynamics import build_victim, check_compatible

logger = structlog.get_logger()

# child ids of the per-seed root stream
ENV_STREAM = 0
PLANNER_STREAM = 1
INIT_STREAM = 2
PRE_ATTACK_STREAM = 3


@dataclass(frozen=True)
class EpisodeStep:
    t: int
    theta: ModelParams
    z: DataPoint
    a: DataPoint
    g: float
    jtilde: float

    @property
    def perturb_norm(self) -> float:
        return float(np.linalg.norm(self.a.features - self.z.features))


@dataclass
class EpisodeTrace:
    policy: PolicyKind
    seed: int
    gamma: float
    theta0: ModelParams
    cost: CostSpec
    steps: List[EpisodeStep] = field(default_factory=list)
    final_model: Optional[ModelParams] = None
    wall_seconds: float = 0.0

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def jtilde_T(self) -> float:
        return self.steps[-1].jtilde

    @property
    def costs(self) -> List[float]:
        return [s.g for s in self.steps]

    @property
    def actions(self) -> List[DataPoint]:
        return [s.a for s in self.steps]

    def jtilde_at(self, t: int) -> float:
        return self.steps[t].jtilde


class EpisodeRunner:
    """Runs one poisoning episode: z_t from the environment, a_t from the
    attacker, theta_{t+1} = f(theta_t, a_t), cost charged on the way."""

    def __init__(self, config: EpisodeConfig):
        self.config = config
        validate_gamma(config.gamma)
        root = RngStream.root(config.seed)
        self.env_stream = rng_fork(root, ENV_STREAM)
        self.planner_stream = rng_fork(root, PLANNER_STREAM)
        self.init_stream = rng_fork(root, INIT_STREAM)
        self.pre_attack_stream = rng_fork(root, PRE_ATTACK_STREAM)

    def run(self) -> EpisodeTrace:
        config = self.config
        victim = config.victim
        started = time.perf_counter()

        environment = build_environment(config.env, victim)
        init_rng = self.init_stream.generator()
        theta0 = resolve_params(config.theta0, victim, init_rng)
        cost = resolve_cost_spec(config.cost, victim, init_rng)
        stream = sample_stream(environment, config.T, self.env_stream)
        buffer = EmpiricalBuffer(sample_stream(environment, config.pre_attack_n, self.pre_attack_stream))

        logger.info(
            "Episode started",
            policy=config.policy.value,
            seed=config.seed,
            T=config.T,
            pre_attack_n=config.pre_attack_n,
        )
        trace = EpisodeTrace(policy=config.policy, seed=config.seed, gamma=config.gamma, theta0=theta0, cost=cost)
        try:
            attacker = build_attacker(config, cost, theta0, stream, buffer, self.planner_stream.generator())
        except Exception as e:
            raise EpisodeError(0, e) from e
        running = RunningCost(cost, victim)

        theta = theta0
        jtilde = 0.0
        for t, z in enumerate(stream):
            try:
                buffer.push(z)
                action = attacker.act(ControlState(model=theta, incoming=z, step=t))
                if action.label != z.label:
                    raise LabelError("label perturbation disabled")
                check_compatible(victim, theta, action)
                g, next_values = running.value(theta.values, z.features, action.features, action.label)
                next_theta = theta.replace(next_values)
            except Exception as e:
                logger.error("Episode step failed", policy=config.policy.value, seed=config.seed, step=t, error=str(e))
                raise EpisodeError(t, e) from e
            jtilde += config.gamma ** t * g
            trace.steps.append(EpisodeStep(t=t, theta=theta, z=z, a=action, g=g, jtilde=jtilde))
            logger.debug("Episode step", step=t, g=g, jtilde=jtilde)
            theta = next_theta

        trace.final_model = theta
        trace.wall_seconds = time.perf_counter() - started
        logger.info(
            "Episode finished",
            policy=config.policy.value,
            seed=config.seed,
            jtilde=trace.jtilde_T,
            wall_seconds=round(trace.wall_seconds, 3),
        )
        return trace


def run_episode(config: EpisodeConfig) -> EpisodeTrace:
    return EpisodeRunner(config).run()


def replay_models(victim: VictimSpec, theta0: ModelParams, actions: Sequence[DataPoint]) -> List[ModelParams]:
    """theta_0..theta_T re-simulated from recorded actions."""
    dynamics = build_victim(victim)
    models = [theta0]
    for action in actions:
        check_compatible(victim, models[-1], action)
        models.append(models[-1].replace(dynamics.step(models[-1].values, action.features, action.label)))
    return models
