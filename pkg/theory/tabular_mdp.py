from dataclasses import dataclass
from typing import Optional

import numpy as np

from core.discount import validate_gamma
from errors import InvalidArgumentError, ShapeMismatchError

PROBABILITY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class TabularMDP:
    """Finite MDP with transitions[s, a, s'] and costs[s, a] in [0, c_max]."""

    transitions: np.ndarray
    costs: np.ndarray
    gamma: float
    mu0: Optional[np.ndarray] = None
    c_max: float = 1.0

    def __post_init__(self):
        transitions = np.asarray(self.transitions, dtype=np.float64)
        costs = np.asarray(self.costs, dtype=np.float64)
        if transitions.ndim != 3 or transitions.shape[0] != transitions.shape[2]:
            raise ShapeMismatchError(f"transitions must be (S, A, S), got {transitions.shape}")
        if costs.shape != transitions.shape[:2]:
            raise ShapeMismatchError(f"costs must be {transitions.shape[:2]}, got {costs.shape}")
        if np.any(transitions < 0) or np.max(np.abs(transitions.sum(axis=2) - 1.0)) > PROBABILITY_TOL:
            raise InvalidArgumentError("every transition row must be a probability vector")
        if np.any(costs < 0) or np.any(costs > self.c_max):
            raise InvalidArgumentError(f"costs must lie in [0, {self.c_max}]")
        mu0 = np.full(transitions.shape[0], 1.0 / transitions.shape[0]) if self.mu0 is None else np.asarray(self.mu0, dtype=np.float64)
        if mu0.shape != (transitions.shape[0],) or abs(mu0.sum() - 1.0) > 1e-9:
            raise InvalidArgumentError("mu0 must be a distribution over states")
        object.__setattr__(self, "transitions", transitions)
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "mu0", mu0)
        object.__setattr__(self, "gamma", validate_gamma(self.gamma))

    @property
    def n_states(self) -> int:
        return self.transitions.shape[0]

    @property
    def n_actions(self) -> int:
        return self.transitions.shape[1]

    def with_transitions(self, transitions: np.ndarray) -> "TabularMDP":
        return TabularMDP(transitions=transitions, costs=self.costs, gamma=self.gamma, mu0=self.mu0, c_max=self.c_max)

    def max_transition_l1(self, other: "TabularMDP") -> float:
        return float(np.max(np.abs(self.transitions - other.transitions).sum(axis=2)))


def _normalize(rows: np.ndarray) -> np.ndarray:
    rows = rows / rows.sum(axis=-1, keepdims=True)
    # push rounding residue onto the largest entry so rows sum to 1 tightly
    idx = np.argmax(rows, axis=-1)
    residue = 1.0 - rows.sum(axis=-1)
    np.put_along_axis(rows, idx[..., None], np.take_along_axis(rows, idx[..., None], axis=-1) + residue[..., None], axis=-1)
    return rows


def random_plain_mdp(n_states: int, n_actions: int, gamma: float, rng: np.random.Generator, c_max: float = 1.0) -> TabularMDP:
    transitions = _normalize(rng.dirichlet(np.ones(n_states), size=(n_states, n_actions)))
    costs = rng.uniform(0.0, c_max, size=(n_states, n_actions))
    return TabularMDP(transitions=transitions, costs=costs, gamma=gamma, c_max=c_max)


@dataclass(frozen=True, eq=False)
class AttackMDPPair:
    """A poisoning MDP and its estimate that differ only in the data distribution.

    State s = i * n_data + j pairs model index i with data index j; the action
    moves the model deterministically to next_model[i, j, a] and the next data
    index is drawn from P (true) or P_hat (estimate)."""

    model: TabularMDP
    estimate: TabularMDP
    P: np.ndarray
    P_hat: np.ndarray

    @property
    def epsilon(self) -> float:
        return float(np.abs(self.P_hat - self.P).sum())


def attack_transitions(next_model: np.ndarray, data_dist: np.ndarray) -> np.ndarray:
    n_models, n_data, n_actions = next_model.shape
    n_states = n_models * n_data
    transitions = np.zeros((n_states, n_actions, n_states))
    for i in range(n_models):
        for j in range(n_data):
            for a in range(n_actions):
                target = next_model[i, j, a] * n_data
                transitions[i * n_data + j, a, target:target + n_data] = data_dist
    return transitions


def attack_mdp_pair(
    next_model: np.ndarray, costs: np.ndarray, P: np.ndarray, P_hat: np.ndarray, gamma: float, c_max: float = 1.0
) -> AttackMDPPair:
    P = np.asarray(P, dtype=np.float64)
    P_hat = np.asarray(P_hat, dtype=np.float64)
    model = TabularMDP(attack_transitions(next_model, P), costs, gamma, c_max=c_max)
    estimate = model.with_transitions(attack_transitions(next_model, P_hat))
    return AttackMDPPair(model=model, estimate=estimate, P=P, P_hat=P_hat)


def random_attack_mdp(
    n_models: int,
    n_data: int,
    n_actions: int,
    gamma: float,
    rng: np.random.Generator,
    c_max: float = 1.0,
    mix: Optional[float] = None,
) -> AttackMDPPair:
    """Random pair with P_hat = (1 - mix) P + mix Q for a random Q; mix is drawn
    uniformly from [0, 1] when not given."""
    next_model = rng.integers(0, n_models, size=(n_models, n_data, n_actions))
    costs = rng.uniform(0.0, c_max, size=(n_models * n_data, n_actions))
    P = _normalize(rng.dirichlet(np.ones(n_data)))
    Q = _normalize(rng.dirichlet(np.ones(n_data)))
    mix = rng.uniform() if mix is None else mix
    P_hat = P if mix == 0 else _normalize((1.0 - mix) * P + mix * Q)
    return attack_mdp_pair(next_model, costs, P, P_hat, gamma, c_max)
