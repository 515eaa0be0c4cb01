import math

import numpy as np
import pytest

from core.types import DataPoint, ModelParams
from costs.nefarious import cosine, nefarious_cost, nefarious_gradient
from costs.running import running_cost, running_cost_gradient
from costs.spec import Aversion, Backdoor, CostSpec, Targeted, resolve_cost_spec
from errors import InvalidArgumentError, LabelError, ShapeMismatchError
from models import CostConfig, NefariousKind, NefariousMetric, VictimKind, VictimSpec
from tests.helpers import central_difference, random_instance, rel_err
from victims.dynamics import victim_update

LOGREG = VictimSpec(kind=VictimKind.LOGREG, eta=0.1, d=2)
KMEANS = VictimSpec(kind=VictimKind.SOFT_KMEANS, eta=0.01, k=2, d=1)


def test_cosine_examples():
    assert cosine([1.0, 0.0], [0.0, 1.0]) == 0.0
    assert cosine([3.0, -4.0], [3.0, -4.0]) == pytest.approx(1.0)
    assert cosine([1.0, 2.0], [2.0, 1.0]) == pytest.approx(0.8)


def test_cosine_undefined_at_zero():
    with pytest.raises(InvalidArgumentError, match="cosine undefined at zero"):
        cosine([0.0, 0.0], [1.0, 0.0])


def test_nefarious_cost_variants():
    target = ModelParams.logreg([1.0, 2.0])
    cos_spec = CostSpec(lam=1.0, nefarious=Targeted(target), metric=NefariousMetric.COSINE_SIM)
    assert nefarious_cost(cos_spec, target) == pytest.approx(-1.0)

    centroids = ModelParams.kmeans([[-3.0], [3.0]])
    assert nefarious_cost(CostSpec(lam=1.0, nefarious=Targeted(centroids)), centroids) == 0.0

    backdoor = CostSpec(lam=1.0, nefarious=Backdoor(DataPoint([1.0, 1.0], 1)))
    assert nefarious_cost(backdoor, ModelParams.logreg([0.0, 0.0])) == pytest.approx(math.log(2.0))

    aversion = CostSpec(lam=1.0, nefarious=Aversion(ModelParams.logreg([1.0, 1.0])))
    assert nefarious_cost(aversion, ModelParams.logreg([2.0, 1.0])) == pytest.approx(-1.0)


def test_cosine_metric_rejected_for_kmeans():
    spec = CostSpec(lam=1.0, nefarious=Targeted(ModelParams.kmeans([[1.0], [2.0]])), metric=NefariousMetric.COSINE_SIM)
    with pytest.raises(InvalidArgumentError):
        spec.check_victim(KMEANS)
    with pytest.raises(InvalidArgumentError):
        nefarious_cost(spec, ModelParams.kmeans([[0.0], [1.0]]))


def test_target_shape_must_match_model():
    spec = CostSpec(lam=1.0, nefarious=Targeted(ModelParams.logreg([1.0, 2.0, 3.0])))
    with pytest.raises(ShapeMismatchError):
        nefarious_cost(spec, ModelParams.logreg([1.0, 2.0]))


@pytest.mark.parametrize("goal", [
    Targeted(ModelParams.logreg([1.0, -1.5])),
    Aversion(ModelParams.logreg([0.5, 0.5])),
    Backdoor(DataPoint([0.7, -0.2], -1)),
])
def test_nefarious_gradient_matches_finite_differences(goal):
    for metric in (NefariousMetric.SQUARED_DIST, NefariousMetric.COSINE_SIM):
        spec = CostSpec(lam=1.0, nefarious=goal, metric=metric)
        theta = ModelParams.logreg([1.2, 0.4])
        fd = central_difference(lambda t: nefarious_cost(spec, theta.replace(t)), theta.values)
        assert rel_err(nefarious_gradient(spec, theta), fd) <= 1e-6


def test_running_cost_zero_cases():
    theta = ModelParams.logreg([1.0, 0.0])
    point = DataPoint([0.5, 0.5], 1)
    spec = CostSpec(lam=0.0, nefarious=Targeted(ModelParams.logreg([0.0, 1.0])))
    assert running_cost(spec, LOGREG, theta, point, point) == 0.0


def test_running_cost_charges_post_update_model():
    theta = ModelParams.kmeans([[-2.0], [2.0]])
    clean = DataPoint([0.0])
    target = victim_update(KMEANS, theta, clean)
    spec = CostSpec(lam=10.0, nefarious=Targeted(target))
    assert running_cost(spec, KMEANS, theta, clean, clean) == 0.0


def test_running_cost_orthogonal_cosine_is_zero():
    theta = ModelParams.logreg([1.0, 0.0])
    clean = DataPoint([1.0, 0.0], 1)
    next_theta = victim_update(LOGREG, theta, clean)
    spec = CostSpec(
        lam=100.0,
        nefarious=Targeted(ModelParams.logreg([0.0, 1.0])),
        metric=NefariousMetric.COSINE_SIM,
    )
    assert next_theta.values[1] == 0.0
    assert running_cost(spec, LOGREG, theta, clean, clean) == pytest.approx(0.0, abs=1e-15)


def test_running_cost_rejects_label_change():
    theta = ModelParams.logreg([1.0, 0.0])
    spec = CostSpec(lam=1.0, nefarious=Targeted(ModelParams.logreg([0.0, 1.0])))
    with pytest.raises(LabelError, match="label perturbation disabled"):
        running_cost(spec, LOGREG, theta, DataPoint([1.0, 0.0], 1), DataPoint([1.0, 0.0], -1))


def test_running_cost_lower_bounds():
    rng = np.random.default_rng(5)
    for _ in range(100):
        victim, cost, theta, clean = random_instance(rng, VictimKind(rng.choice(["logreg", "soft_kmeans"])))
        action = clean.with_features(clean.features + rng.standard_normal(clean.dim))
        value = running_cost(cost, victim, theta, clean, action)
        floor = -cost.lam if cost.metric == NefariousMetric.COSINE_SIM else 0.0
        assert value >= floor - 1e-12


def test_running_cost_gradient_without_attack_weight():
    theta = ModelParams.logreg([1.0, 0.0])
    spec = CostSpec(lam=0.0, nefarious=Targeted(ModelParams.logreg([0.0, 1.0])))
    clean = DataPoint([1.0, 2.0], 1)
    action = DataPoint([1.5, 1.0], 1)
    np.testing.assert_allclose(running_cost_gradient(spec, LOGREG, theta, clean, action), [1.0, -2.0])
    np.testing.assert_array_equal(running_cost_gradient(spec, LOGREG, theta, clean, clean), [0.0, 0.0])


def test_running_cost_gradient_matches_finite_differences():
    rng = np.random.default_rng(42)
    for i in range(200):
        kind = VictimKind.LOGREG if i % 2 == 0 else VictimKind.SOFT_KMEANS
        victim, cost, theta, clean = random_instance(rng, kind)
        action = clean.with_features(clean.features + 0.5 * rng.standard_normal(clean.dim))
        grad = running_cost_gradient(cost, victim, theta, clean, action)
        fd = central_difference(
            lambda a: running_cost(cost, victim, theta, clean, action.with_features(a)), action.features
        )
        assert rel_err(grad, fd) <= 1e-5


def test_resolve_cost_spec_draws_random_target_of_victim_shape():
    config = CostConfig(**{"lambda": 10.0, "nefarious": NefariousKind.TARGETED, "target": "random"})
    spec = resolve_cost_spec(config, KMEANS, np.random.default_rng(0))
    assert spec.nefarious.target.shape == (2, 1)
    assert spec.lam == 10.0


def test_cost_config_refuses_label_perturbation():
    with pytest.raises(ValueError, match="label perturbation disabled"):
        CostConfig(perturb_labels=True)


def test_relative_error_scales_with_small_gradients():
    assert rel_err([2e-6, 0.0], [1e-6, 0.0]) == pytest.approx(0.5)
    assert rel_err([0.0], [0.0]) == 0.0
