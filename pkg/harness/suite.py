from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence

import structlog

from errors import EpisodeError, InvalidArgumentError
from harness.episode_runner import EpisodeTrace, run_episode
from models import EpisodeConfig, EpisodeSummary

logger = structlog.get_logger()


@dataclass
class EpisodeOutcome:
    summary: EpisodeSummary
    trace: Optional[EpisodeTrace] = None


def _run_isolated(config: EpisodeConfig, keep_trace: bool = True) -> EpisodeOutcome:
    try:
        trace = run_episode(config)
    except EpisodeError as e:
        logger.error("Episode failed", policy=config.policy.value, seed=config.seed, step=e.step, error=str(e))
        summary = EpisodeSummary(policy=config.policy, seed=config.seed, T=config.T, error=str(e), failed_step=e.step)
        return EpisodeOutcome(summary=summary)
    except Exception as e:
        logger.error("Episode setup failed", policy=config.policy.value, seed=config.seed, error=str(e))
        return EpisodeOutcome(summary=EpisodeSummary(policy=config.policy, seed=config.seed, T=config.T, error=str(e)))

    summary = EpisodeSummary(
        policy=config.policy,
        seed=config.seed,
        T=config.T,
        jtilde_T=trace.jtilde_T,
        wall_seconds=trace.wall_seconds,
    )
    return EpisodeOutcome(summary=summary, trace=trace if keep_trace else None)


def run_suite(configs: Sequence[EpisodeConfig], parallelism: int = 1, keep_traces: bool = True) -> List[EpisodeOutcome]:
    """Run independent episodes; results come back in input order and a
    failing episode is reported in its slot without stopping the others."""
    if parallelism < 1:
        raise InvalidArgumentError(f"parallelism must be >= 1, got {parallelism}")
    configs = list(configs)
    if not configs:
        return []

    logger.info("Suite started", episodes=len(configs), parallelism=parallelism)
    if parallelism == 1 or len(configs) == 1:
        outcomes = [_run_isolated(c, keep_traces) for c in configs]
    else:
        with ProcessPoolExecutor(max_workers=min(parallelism, len(configs))) as executor:
            outcomes = list(executor.map(_run_isolated, configs, [keep_traces] * len(configs)))

    failed = sum(1 for o in outcomes if not o.summary.ok)
    logger.info("Suite finished", episodes=len(outcomes), failed=failed)
    return outcomes
