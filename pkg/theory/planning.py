from dataclasses import dataclass, field
from typing import List

import numpy as np
import structlog

from errors import InvalidArgumentError, ShapeMismatchError
from theory.tabular_mdp import TabularMDP

logger = structlog.get_logger()

MAX_SWEEPS = 100_000


@dataclass(frozen=True, eq=False)
class ValueIterationResult:
    values: np.ndarray
    policy: np.ndarray
    residuals: List[float] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.residuals)


def q_values(mdp: TabularMDP, values: np.ndarray) -> np.ndarray:
    return mdp.costs + mdp.gamma * np.einsum("sat,t->sa", mdp.transitions, values)


def greedy_policy(mdp: TabularMDP, values: np.ndarray) -> np.ndarray:
    # np.argmin breaks ties toward the lowest action index
    return np.argmin(q_values(mdp, values), axis=1)


def value_iteration(mdp: TabularMDP, tol: float = 1e-10) -> ValueIterationResult:
    """Bellman sweeps from V = 0 until the iterate is within tol of V* in sup norm."""
    if tol <= 0:
        raise InvalidArgumentError(f"tol must be positive, got {tol}")
    values = np.zeros(mdp.n_states)
    residuals: List[float] = []
    stop = tol * (1.0 - mdp.gamma) / mdp.gamma
    for _ in range(MAX_SWEEPS):
        updated = q_values(mdp, values).min(axis=1)
        residual = float(np.max(np.abs(updated - values)))
        residuals.append(residual)
        values = updated
        if residual <= stop:
            break
    else:
        logger.warning("Value iteration hit the sweep limit", sweeps=MAX_SWEEPS, residual=residuals[-1])
    return ValueIterationResult(values=values, policy=greedy_policy(mdp, values), residuals=residuals)


def policy_evaluation(mdp: TabularMDP, policy, tol: float = 1e-10) -> np.ndarray:
    """Exact solve of V = g_phi + gamma T_phi V, refined until the residual is within tol."""
    policy = np.asarray(policy, dtype=np.int64)
    if policy.shape != (mdp.n_states,):
        raise ShapeMismatchError(f"policy must assign one action per state, got shape {policy.shape}")
    if np.any(policy < 0) or np.any(policy >= mdp.n_actions):
        raise InvalidArgumentError("policy action out of range")
    states = np.arange(mdp.n_states)
    cost = mdp.costs[states, policy]
    system = np.eye(mdp.n_states) - mdp.gamma * mdp.transitions[states, policy]
    values = np.linalg.solve(system, cost)
    for _ in range(5):
        residual = cost - system @ values
        if float(np.max(np.abs(residual))) <= tol:
            break
        values = values + np.linalg.solve(system, residual)
    return values
