import numpy as np
import pytest

from core.types import DataPoint, ModelParams
from costs.running import running_cost, running_cost_gradient
from costs.spec import CostSpec, Targeted
from errors import InvalidArgumentError, LabelError
from models import TrajOptConfig, VictimKind, VictimSpec
from tests.helpers import central_difference, random_instance, rel_err
from trajopt.optimizer import optimize_scenarios, optimize_trajectory
from trajopt.rollout import rollout_gradient, rollout_objective
from victims.dynamics import victim_update

GAMMA = 0.9


def _futures(rng, first: DataPoint, horizon: int):
    futures = [first]
    for _ in range(horizon - 1):
        label = int(rng.choice([-1, 1])) if first.labeled else None
        futures.append(DataPoint(rng.standard_normal(first.dim), label))
    return futures


def _perturbed(rng, futures, scale=0.3):
    return [p.with_features(p.features + scale * rng.standard_normal(p.dim)) for p in futures]


def _kmeans_problem(lam=10.0):
    victim = VictimSpec(kind=VictimKind.SOFT_KMEANS, eta=0.05, k=2, d=1)
    cost = CostSpec(lam=lam, nefarious=Targeted(ModelParams.kmeans([[-3.0], [3.0]])))
    theta = ModelParams.kmeans([[-1.0], [1.0]])
    futures = [DataPoint([v]) for v in (0.4, -1.2, 0.9, 1.5, -0.3)]
    return victim, cost, theta, futures


def test_single_step_rollout_is_running_cost():
    rng = np.random.default_rng(0)
    victim, cost, theta, clean = random_instance(rng, VictimKind.LOGREG)
    action = _perturbed(rng, [clean])[0]
    assert rollout_objective(victim, cost, theta, [clean], [action], GAMMA) == running_cost(cost, victim, theta, clean, action)
    np.testing.assert_allclose(
        rollout_gradient(victim, cost, theta, [clean], [action], GAMMA)[0],
        running_cost_gradient(cost, victim, theta, clean, action),
        rtol=1e-12,
        atol=1e-14,
    )


def test_zero_weight_zero_perturbation_rollout_is_zero():
    victim, cost, theta, futures = _kmeans_problem(lam=0.0)
    assert rollout_objective(victim, cost, theta, futures, futures, GAMMA) == 0.0


def test_rollout_matches_step_by_step_simulation():
    rng = np.random.default_rng(1)
    victim, cost, theta, first = random_instance(rng, VictimKind.SOFT_KMEANS)
    futures = _futures(rng, first, 3)
    actions = _perturbed(rng, futures)
    expected = 0.0
    model = theta
    for tau, (z, a) in enumerate(zip(futures, actions)):
        expected += GAMMA ** tau * running_cost(cost, victim, model, z, a)
        model = victim_update(victim, model, a)
    assert rollout_objective(victim, cost, theta, futures, actions, GAMMA) == pytest.approx(expected, rel=1e-12)


def test_zero_weight_gradient_is_discounted_perturbation():
    victim, cost, theta, futures = _kmeans_problem(lam=0.0)
    actions = [p.with_features(p.features + 0.5) for p in futures]
    grads = rollout_gradient(victim, cost, theta, futures, actions, GAMMA)
    np.testing.assert_allclose(grads[0], 2 * (actions[0].features - futures[0].features))
    for tau, (g, z, a) in enumerate(zip(grads, futures, actions)):
        np.testing.assert_allclose(g, 2 * GAMMA ** tau * (a.features - z.features))


def test_rollout_rejects_label_changes_and_length_mismatch():
    victim = VictimSpec(kind=VictimKind.LOGREG, eta=0.1, d=1)
    cost = CostSpec(lam=1.0, nefarious=Targeted(ModelParams.logreg([1.0])))
    theta = ModelParams.logreg([0.5])
    with pytest.raises(LabelError):
        rollout_objective(victim, cost, theta, [DataPoint([1.0], 1)], [DataPoint([1.0], -1)], GAMMA)
    with pytest.raises(InvalidArgumentError):
        rollout_objective(victim, cost, theta, [DataPoint([1.0], 1)] * 2, [DataPoint([1.0], 1)], GAMMA)


def test_rollout_gradient_matches_finite_differences():
    rng = np.random.default_rng(2)
    checked = 0
    for horizon in (1, 3, 10):
        for i in range(40):
            kind = VictimKind.LOGREG if i % 2 == 0 else VictimKind.SOFT_KMEANS
            victim, cost, theta, first = random_instance(rng, kind)
            futures = _futures(rng, first, horizon)
            actions = _perturbed(rng, futures)
            grads = np.vstack(rollout_gradient(victim, cost, theta, futures, actions, GAMMA))

            def objective(flat):
                moved = [a.with_features(row) for a, row in zip(actions, flat)]
                return rollout_objective(victim, cost, theta, futures, moved, GAMMA)

            fd = central_difference(objective, np.vstack([a.features for a in actions]))
            assert rel_err(grads, fd) <= 1e-5
            checked += 1
    assert checked >= 100


def test_optimizer_without_attack_weight_returns_futures():
    victim, cost, theta, futures = _kmeans_problem(lam=0.0)
    result = optimize_trajectory(victim, cost, theta, futures, TrajOptConfig(gamma=GAMMA))
    assert result.objective == 0.0 and result.initial_objective == 0.0
    assert result.iterations_used == 0 and result.converged
    for a, z in zip(result.actions, futures):
        np.testing.assert_array_equal(a.features, z.features)


def test_optimizer_never_worse_than_zero_perturbation():
    victim, cost, theta, futures = _kmeans_problem()
    result = optimize_trajectory(victim, cost, theta, futures, TrajOptConfig(gamma=GAMMA, max_iters=300))
    assert result.objective <= result.initial_objective
    assert result.objective < result.initial_objective
    assert all(a.label == z.label for a, z in zip(result.actions, futures))


def test_optimizer_is_deterministic():
    victim, cost, theta, futures = _kmeans_problem()
    config = TrajOptConfig(gamma=GAMMA, max_iters=150)
    first = optimize_trajectory(victim, cost, theta, futures, config)
    second = optimize_trajectory(victim, cost, theta, futures, config)
    np.testing.assert_array_equal(first.action_array, second.action_array)
    assert first.objective == second.objective


def test_best_objective_improves_with_more_iterations():
    victim, cost, theta, futures = _kmeans_problem()
    objectives = [
        optimize_trajectory(victim, cost, theta, futures, TrajOptConfig(gamma=GAMMA, max_iters=n)).objective
        for n in (0, 10, 50, 200)
    ]
    assert all(b <= a for a, b in zip(objectives, objectives[1:]))


def _one_step_objective(theta, z, target, eta, grid):
    # grid: (..., 2) candidate actions for a logistic victim with label +1
    margin = grid @ theta
    weight = 1.0 / (1.0 + np.exp(margin))
    updated = theta + eta * weight[..., None] * grid
    return np.sum((grid - z) ** 2, axis=-1) + np.sum((updated - target) ** 2, axis=-1)


def test_single_step_solve_matches_grid_search():
    theta = np.array([0.5, -0.2])
    z = np.array([1.0, 0.5])
    target = np.array([-1.0, 1.0])
    eta = 0.3
    victim = VictimSpec(kind=VictimKind.LOGREG, eta=eta, d=2)
    cost = CostSpec(lam=1.0, nefarious=Targeted(ModelParams.logreg(target)))
    result = optimize_trajectory(
        victim, cost, ModelParams.logreg(theta), [DataPoint(z, 1)], TrajOptConfig(horizon=1, gamma=GAMMA)
    )

    coarse = np.arange(-3.0, 3.0 + 1e-9, 1e-2)
    grid = np.stack(np.meshgrid(z[0] + coarse, z[1] + coarse, indexing="ij"), axis=-1)
    values = _one_step_objective(theta, z, target, eta, grid)
    best = grid[np.unravel_index(np.argmin(values), values.shape)]
    fine = np.arange(-0.02, 0.02 + 1e-12, 1e-4)
    grid = np.stack(np.meshgrid(best[0] + fine, best[1] + fine, indexing="ij"), axis=-1)
    grid_best = float(np.min(_one_step_objective(theta, z, target, eta, grid)))

    assert abs(result.objective - grid_best) <= 1e-4


def test_warm_start_does_not_change_reported_baseline():
    victim, cost, theta, futures = _kmeans_problem()
    config = TrajOptConfig(gamma=GAMMA, max_iters=100)
    cold = optimize_trajectory(victim, cost, theta, futures, config)
    bad_guess = np.full((len(futures), 1), 50.0)
    warm = optimize_trajectory(victim, cost, theta, futures, config, warm_start=bad_guess)
    assert warm.initial_objective == cold.initial_objective
    np.testing.assert_array_equal(warm.action_array, cold.action_array)


def test_scenarios_share_first_action():
    victim, cost, theta, futures = _kmeans_problem()
    other = [futures[0]] + [DataPoint([v]) for v in (2.0, -2.0, 0.1, 0.7)]
    result = optimize_scenarios(victim, cost, theta, [futures, other], TrajOptConfig(gamma=GAMMA, max_iters=100))
    assert result.objective <= result.initial_objective
    assert len(result.actions) == len(futures)


def test_scenarios_must_agree_on_observed_point():
    victim, cost, theta, futures = _kmeans_problem()
    other = [DataPoint([9.0])] + futures[1:]
    with pytest.raises(InvalidArgumentError):
        optimize_scenarios(victim, cost, theta, [futures, other], TrajOptConfig(gamma=GAMMA))


def test_best_warm_start_candidate_is_used():
    victim, cost, theta, futures = _kmeans_problem()
    solved = optimize_trajectory(victim, cost, theta, futures, TrajOptConfig(gamma=GAMMA, max_iters=200))
    plan = solved.action_array - np.vstack([p.features for p in futures])
    frozen = TrajOptConfig(gamma=GAMMA, max_iters=0)
    warm = optimize_trajectory(victim, cost, theta, futures, frozen, warm_start=[np.full_like(plan, 50.0), plan])
    assert warm.initial_objective == solved.initial_objective
    assert warm.objective == pytest.approx(solved.objective, rel=1e-12)
    assert warm.objective < warm.initial_objective
