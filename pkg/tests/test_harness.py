import csv

import numpy as np
import pytest

from attackers.nlp_attacker import NlpMpcAttacker
from attackers.null_attacker import NullAttacker
from core.types import DataPoint
from errors import EpisodeError
from harness.episode_runner import replay_models, run_episode
from harness.recorder import trace_filename, write_summary_csv, write_trace_csv
from harness.suite import run_suite
from models import (
    CostConfig,
    EnvironmentConfig,
    EpisodeConfig,
    PolicyKind,
    TrajOptConfig,
    VictimKind,
    VictimSpec,
)

KMEANS = VictimSpec(kind=VictimKind.SOFT_KMEANS, eta=0.05, k=2, d=1)
MIXTURE = EnvironmentConfig(kind="gaussian_mixture_1d", means=[-1.0, 1.0], weights=[0.5, 0.5], stddev=1.0)
LABELED_MIXTURE = MIXTURE.model_copy(update={"component_labels": [-1, 1]})


def _config(policy=PolicyKind.NLP, T=12, lam=10.0, seed=0, **overrides):
    fields = dict(
        victim=KMEANS,
        cost=CostConfig(**{"lambda": lam, "target": [[-3.0], [3.0]]}),
        env=MIXTURE,
        policy=policy,
        trajopt=TrajOptConfig(horizon=4, max_iters=30),
        T=T,
        gamma=0.95,
        theta0=[[-2.0], [2.0]],
        seed=seed,
        pre_attack_n=20,
    )
    fields.update(overrides)
    return EpisodeConfig(**fields)


def test_null_without_attack_weight_costs_nothing():
    trace = run_episode(_config(policy=PolicyKind.NULL, lam=0.0))
    assert trace.jtilde_T == 0.0


def test_single_step_episode():
    trace = run_episode(_config(policy=PolicyKind.GREEDY, T=1))
    assert len(trace) == 1
    assert trace.jtilde_at(0) == trace.steps[0].g


def test_cumulative_cost_recurrence():
    trace = run_episode(_config())
    previous = 0.0
    for step in trace.steps:
        assert abs(step.jtilde - (previous + 0.95 ** step.t * step.g)) <= 1e-10
        previous = step.jtilde


def test_replay_reproduces_models_bitwise():
    config = _config()
    trace = run_episode(config)
    models = replay_models(config.victim, trace.theta0, trace.actions)
    for step, model in zip(trace.steps, models):
        np.testing.assert_array_equal(step.theta.values, model.values)
    np.testing.assert_array_equal(models[-1].values, trace.final_model.values)


def test_policies_on_one_seed_share_the_stream():
    null = run_episode(_config(policy=PolicyKind.NULL))
    greedy = run_episode(_config(policy=PolicyKind.GREEDY))
    for a, b in zip(null.steps, greedy.steps):
        np.testing.assert_array_equal(a.z.features, b.z.features)


def test_random_initial_model_is_seeded():
    first = run_episode(_config(policy=PolicyKind.NULL, theta0="random", seed=4))
    second = run_episode(_config(policy=PolicyKind.NULL, theta0="random", seed=4))
    np.testing.assert_array_equal(first.theta0.values, second.theta0.values)
    assert first.jtilde_T == second.jtilde_T


def test_planner_sees_pre_attack_data_and_current_point(monkeypatch):
    seen = []
    original = NlpMpcAttacker.act

    def spy(self, state):
        seen.append((state.step, len(self.buffer), self.buffer.points[-1] is state.incoming))
        return original(self, state)

    monkeypatch.setattr(NlpMpcAttacker, "act", spy)
    run_episode(_config(T=6))
    assert seen == [(t, 20 + t + 1, True) for t in range(6)]


def test_label_change_aborts_with_step(monkeypatch):
    def flip_at_two(self, state):
        if state.step == 2:
            return DataPoint(features=state.incoming.features, label=-state.incoming.label)
        return state.incoming

    monkeypatch.setattr(NullAttacker, "act", flip_at_two)
    config = _config(
        policy=PolicyKind.NULL,
        victim=VictimSpec(kind=VictimKind.LOGREG, eta=0.1, d=1),
        cost=CostConfig(**{"lambda": 1.0, "target": [2.0]}),
        env=LABELED_MIXTURE,
        theta0=[0.5],
    )
    with pytest.raises(EpisodeError) as info:
        run_episode(config)
    assert info.value.step == 2
    assert "label perturbation disabled" in str(info.value)


def test_suite_empty():
    assert run_suite([], parallelism=3) == []


def test_suite_identical_configs_identical_traces():
    outcomes = run_suite([_config(), _config()], parallelism=1)
    first, second = (o.trace for o in outcomes)
    assert [s.g for s in first.steps] == [s.g for s in second.steps]


def test_suite_parallelism_does_not_change_results():
    configs = [_config(policy=p, seed=s) for s in (0, 1) for p in (PolicyKind.NULL, PolicyKind.NLP)]
    serial = run_suite(configs, parallelism=1)
    parallel = run_suite(configs, parallelism=2)
    assert [o.summary.jtilde_T for o in serial] == [o.summary.jtilde_T for o in parallel]
    assert [(o.summary.policy, o.summary.seed) for o in parallel] == [(c.policy, c.seed) for c in configs]


def test_suite_reports_failures_without_stopping(tmp_path):
    broken = _config(env=EnvironmentConfig(kind="dataset", path=str(tmp_path / "missing.csv")))
    outcomes = run_suite([_config(policy=PolicyKind.NULL), broken, _config(policy=PolicyKind.GREEDY)])
    assert [o.summary.ok for o in outcomes] == [True, False, True]
    assert "file not found" in outcomes[1].summary.error
    assert outcomes[1].trace is None


def test_trace_and_summary_csv(tmp_path):
    outcome = run_suite([_config(T=5)])[0]
    path = write_trace_csv(outcome.trace, tmp_path / trace_filename(outcome.trace))
    assert path.name == "trace_nlp_seed0.csv"
    with path.open() as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["t", "g", "Jtilde", "perturb_norm", "theta0", "theta1", "z0", "a0"]
    assert len(rows) == 6
    assert float(rows[-1][2]) == outcome.trace.jtilde_T

    summary = write_summary_csv([outcome.summary], tmp_path / "summary.csv")
    with summary.open() as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["policy", "seed", "T", "Jtilde_T", "wall_seconds"]
    assert rows[1][:3] == ["nlp", "0", "5"]
