import csv
import math
from pathlib import Path
from typing import Sequence, Tuple, Union

import numpy as np
import structlog

from core.rng import RngStream, rng_fork
from errors import InvalidArgumentError, ShapeMismatchError
from models import (
    Prop1Report,
    Prop1TrialRecord,
    SimulationLemmaRecord,
    SimulationLemmaReport,
    Thm2GapRecord,
    Thm2GapReport,
    Thm2Report,
    Thm2TrialRecord,
)
from theory.planning import policy_evaluation, value_iteration
from theory.tabular_mdp import AttackMDPPair, attack_mdp_pair, random_attack_mdp, random_plain_mdp

logger = structlog.get_logger()

BOUND_SLACK = 1e-8
DEFAULT_GAMMAS = (0.5, 0.9)
MAX_STATES = 10
MAX_ACTIONS = 10


def l1_distance(p, q) -> float:
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape or p.ndim != 1:
        raise ShapeMismatchError(f"distributions must be vectors of equal length, got {p.shape} and {q.shape}")
    for dist in (p, q):
        if np.any(dist < 0) or abs(dist.sum() - 1.0) > 1e-9:
            raise InvalidArgumentError("inputs must be probability vectors")
    return float(np.abs(p - q).sum())


def prop1_bound(epsilon: float, gamma: float, c_max: float = 1.0) -> float:
    return gamma * c_max * epsilon / (1.0 - gamma) ** 2


def simulation_lemma_bound(epsilon: float, gamma: float, c_max: float = 1.0) -> float:
    return gamma * c_max * epsilon / (2.0 * (1.0 - gamma) ** 2)


def thm2_l1_bound(N: int, n: int, delta: float) -> float:
    """L1 radius that an n-sample empirical multinomial over N outcomes stays
    within with probability at least 1 - delta."""
    if N < 2 or n < 1 or not 0.0 < delta < 1.0:
        raise InvalidArgumentError(f"need N >= 2, n >= 1, delta in (0, 1); got N={N}, n={n}, delta={delta}")
    log_term = (N + 1) * math.log(2.0) - math.log(delta)
    return 2.0 * math.sqrt(log_term / (2.0 * n))


def thm2_gap_bound(N: int, n: int, delta: float, gamma: float, c_max: float = 1.0) -> float:
    return prop1_bound(thm2_l1_bound(N, n, delta), gamma, c_max)


def optimality_gap(pair: AttackMDPPair, tol: float = 1e-10) -> float:
    """sup_s of V_M under the policy planned on the estimate minus V_M under the true optimum."""
    planned = value_iteration(pair.estimate, tol).policy
    optimal = value_iteration(pair.model, tol).policy
    return float(np.max(policy_evaluation(pair.model, planned, tol) - policy_evaluation(pair.model, optimal, tol)))


def _random_pair(rng: np.random.Generator, gamma: float, structured: bool) -> Tuple[AttackMDPPair, float]:
    n_data = int(rng.integers(2, 6))
    n_models = int(rng.integers(2, max(2, MAX_STATES // n_data) + 1))
    n_actions = int(rng.integers(2, MAX_ACTIONS + 1))
    if structured:
        pair = random_attack_mdp(n_models, n_data, n_actions, gamma, rng)
        return pair, pair.epsilon
    model = random_plain_mdp(n_models * n_data, n_actions, gamma, rng)
    mix = rng.uniform()
    other = random_plain_mdp(model.n_states, n_actions, gamma, rng)
    estimate = model.with_transitions((1.0 - mix) * model.transitions + mix * other.transitions)
    pair = AttackMDPPair(model=model, estimate=estimate, P=np.ones(1), P_hat=np.ones(1))
    return pair, model.max_transition_l1(estimate)


def verify_prop1(
    trials: int,
    rng: RngStream,
    gammas: Sequence[float] = DEFAULT_GAMMAS,
    tol: float = 1e-10,
    structured: bool = True,
) -> Prop1Report:
    if trials < 1:
        raise InvalidArgumentError("trials must be >= 1")
    records = []
    for trial in range(trials):
        gen = rng_fork(rng, trial).generator()
        gamma = gammas[trial % len(gammas)]
        pair, epsilon = _random_pair(gen, gamma, structured)
        gap = optimality_gap(pair, tol)
        bound = prop1_bound(epsilon, gamma, pair.model.c_max)
        ratio = gap / bound if bound > 0 else 0.0
        records.append(Prop1TrialRecord(trial=trial, epsilon=epsilon, gap=gap, bound=bound, ratio=ratio))
    violations = sum(1 for r in records if r.gap > r.bound + BOUND_SLACK)
    report = Prop1Report(
        records=records,
        violations=violations,
        max_ratio=max(r.ratio for r in records),
        min_gap=min(r.gap for r in records),
        tol=tol,
    )
    logger.info("Optimality gap bound checked", trials=trials, violations=violations, max_ratio=report.max_ratio)
    return report


def verify_thm2(N: int, n: int, delta: float, trials: int, rng: RngStream) -> Thm2Report:
    if trials < 1:
        raise InvalidArgumentError("trials must be >= 1")
    bound = thm2_l1_bound(N, n, delta)
    gen = rng.generator()
    records = []
    for trial in range(trials):
        p = gen.dirichlet(np.ones(N))
        p_hat = gen.multinomial(n, p) / n
        l1 = float(np.abs(p_hat - p).sum())
        records.append(Thm2TrialRecord(trial=trial, l1=l1, bound=bound, covered=l1 <= bound))
    coverage = sum(r.covered for r in records) / trials
    logger.info("Concentration bound checked", N=N, n=n, delta=delta, bound=bound, coverage=coverage)
    return Thm2Report(N=N, n=n, delta=delta, bound=bound, records=records, coverage=coverage)


def verify_simulation_lemma(trials: int, rng: RngStream, gammas: Sequence[float] = DEFAULT_GAMMAS) -> SimulationLemmaReport:
    """Same policy evaluated on the true and estimated MDP differs by at most
    gamma * C * eps / (2 (1 - gamma)^2) in every state."""
    if trials < 1:
        raise InvalidArgumentError("trials must be >= 1")
    records = []
    for trial in range(trials):
        gen = rng_fork(rng, trial).generator()
        gamma = gammas[trial % len(gammas)]
        pair, epsilon = _random_pair(gen, gamma, structured=True)
        policy = gen.integers(0, pair.model.n_actions, size=pair.model.n_states)
        eval_gap = float(
            np.max(np.abs(policy_evaluation(pair.estimate, policy) - policy_evaluation(pair.model, policy)))
        )
        bound = simulation_lemma_bound(epsilon, gamma, pair.model.c_max)
        ratio = eval_gap / bound if bound > 0 else 0.0
        records.append(SimulationLemmaRecord(trial=trial, epsilon=epsilon, eval_gap=eval_gap, bound=bound, ratio=ratio))
    violations = sum(1 for r in records if r.eval_gap > r.bound + BOUND_SLACK)
    return SimulationLemmaReport(records=records, violations=violations, max_ratio=max(r.ratio for r in records))


def verify_thm2_gap(
    N: int,
    n: int,
    delta: float,
    trials: int,
    rng: RngStream,
    gamma: float = 0.9,
    n_models: int = 2,
    n_actions: int = 3,
) -> Thm2GapReport:
    """End to end: plan on the empirical distribution of n samples, measure the
    optimality gap on the true MDP."""
    if trials < 1:
        raise InvalidArgumentError("trials must be >= 1")
    bound = thm2_gap_bound(N, n, delta, gamma)
    records = []
    for trial in range(trials):
        gen = rng_fork(rng, trial).generator()
        next_model = gen.integers(0, n_models, size=(n_models, N, n_actions))
        costs = gen.uniform(0.0, 1.0, size=(n_models * N, n_actions))
        P = gen.dirichlet(np.ones(N))
        P_hat = gen.multinomial(n, P) / n
        pair = attack_mdp_pair(next_model, costs, P, P_hat, gamma)
        gap = optimality_gap(pair)
        records.append(Thm2GapRecord(trial=trial, l1=pair.epsilon, gap=gap, bound=bound, covered=gap <= bound + BOUND_SLACK))
    coverage = sum(r.covered for r in records) / trials
    return Thm2GapReport(N=N, n=n, delta=delta, bound=bound, records=records, coverage=coverage)


def write_prop1_csv(report: Prop1Report, path: Union[str, Path]) -> Path:
    return _write_rows(path, ["trial", "epsilon", "gap", "bound", "ratio"],
                       ([r.trial, r.epsilon, r.gap, r.bound, r.ratio] for r in report.records))


def write_thm2_csv(report: Thm2Report, path: Union[str, Path]) -> Path:
    return _write_rows(path, ["trial", "l1", "bound", "covered"],
                       ([r.trial, r.l1, r.bound, int(r.covered)] for r in report.records))


def write_simulation_lemma_csv(report: SimulationLemmaReport, path: Union[str, Path]) -> Path:
    return _write_rows(path, ["trial", "epsilon", "eval_gap", "bound", "ratio"],
                       ([r.trial, r.epsilon, r.eval_gap, r.bound, r.ratio] for r in report.records))


def write_thm2_gap_csv(report: Thm2GapReport, path: Union[str, Path]) -> Path:
    return _write_rows(path, ["trial", "l1", "gap", "bound", "covered"],
                       ([r.trial, r.l1, r.gap, r.bound, int(r.covered)] for r in report.records))


def _write_rows(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return path
