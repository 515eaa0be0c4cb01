import numpy as np

from core.types import DataPoint, ModelParams
from costs.spec import CostSpec, Targeted
from models import NefariousMetric, VictimKind, VictimSpec


def rel_err(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))), 1e-12)
    return float(np.max(np.abs(a - b))) / scale


def central_difference(fn, x, step=1e-5) -> np.ndarray:
    x = np.array(x, dtype=np.float64)
    grad = np.zeros_like(x)
    for index in np.ndindex(x.shape):
        up = x.copy()
        down = x.copy()
        up[index] += step
        down[index] -= step
        grad[index] = (fn(up) - fn(down)) / (2.0 * step)
    return grad


def vector_with_norm(rng, d, low=1.0, high=2.0) -> np.ndarray:
    v = rng.standard_normal(d)
    return v / np.linalg.norm(v) * rng.uniform(low, high)


def random_instance(rng, kind: VictimKind):
    """(victim, cost, theta, point) with theta and target away from zero."""
    if kind == VictimKind.LOGREG:
        d = int(rng.integers(1, 5))
        victim = VictimSpec(kind=kind, eta=float(rng.uniform(0.05, 0.2)), d=d)
        metric = NefariousMetric.COSINE_SIM if d > 1 and rng.uniform() < 0.5 else NefariousMetric.SQUARED_DIST
        theta = ModelParams.logreg(vector_with_norm(rng, d))
        target = ModelParams.logreg(vector_with_norm(rng, d))
        point = DataPoint(features=rng.standard_normal(d), label=int(rng.choice([-1, 1])))
    else:
        k = int(rng.integers(1, 4))
        d = int(rng.integers(1, 4))
        victim = VictimSpec(kind=kind, eta=float(rng.uniform(0.05, 0.5)), k=k, d=d)
        metric = NefariousMetric.SQUARED_DIST
        theta = ModelParams.kmeans(rng.standard_normal((k, d)))
        target = ModelParams.kmeans(rng.standard_normal((k, d)) * 2.0)
        point = DataPoint(features=rng.standard_normal(d))
    cost = CostSpec(lam=float(rng.uniform(0.5, 10.0)), nefarious=Targeted(target=target), metric=metric)
    return victim, cost, theta, point
