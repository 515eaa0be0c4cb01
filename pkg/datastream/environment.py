from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import structlog

from core.rng import as_generator
from core.types import DataPoint
from datastream.csv_io import load_csv
from datastream.preprocessing import preprocess_points
from errors import ConfigError, InvalidArgumentError
from models import EnvironmentConfig, EnvironmentKind, VictimSpec

logger = structlog.get_logger()


@dataclass(frozen=True)
class GaussianMixture1D:
    means: Tuple[float, ...]
    weights: Tuple[float, ...]
    stddev: float
    component_labels: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if len(self.means) == 0 or len(self.means) != len(self.weights):
            raise InvalidArgumentError("means and weights must be nonempty and of equal length")
        if any(w < 0 for w in self.weights) or abs(sum(self.weights) - 1.0) > 1e-9:
            raise InvalidArgumentError("weights must be nonnegative and sum to 1")
        if self.stddev <= 0:
            raise InvalidArgumentError("stddev must be positive")


@dataclass(frozen=True)
class DatasetResample:
    points: Tuple[DataPoint, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if len(self.points) == 0:
            raise InvalidArgumentError("dataset environment needs at least one point")


EnvironmentSpec = Union[GaussianMixture1D, DatasetResample]


def env_sample(spec: EnvironmentSpec, rng) -> DataPoint:
    rng = as_generator(rng)
    if isinstance(spec, GaussianMixture1D):
        component = int(rng.choice(len(spec.weights), p=np.asarray(spec.weights)))
        value = rng.normal(spec.means[component], spec.stddev)
        label = spec.component_labels[component] if spec.component_labels else None
        return DataPoint(features=[value], label=label)
    return spec.points[int(rng.integers(len(spec.points)))]


def sample_stream(spec: EnvironmentSpec, length: int, rng) -> List[DataPoint]:
    rng = as_generator(rng)
    return [env_sample(spec, rng) for _ in range(length)]


def build_environment(config: EnvironmentConfig, victim: VictimSpec) -> EnvironmentSpec:
    if config.kind == EnvironmentKind.GAUSSIAN_MIXTURE_1D:
        if victim.d != 1:
            raise ConfigError(f"gaussian_mixture_1d produces 1-d points, victim expects d={victim.d}")
        if victim.supervised and config.component_labels is None:
            raise ConfigError("logreg victim needs component_labels on the mixture environment")
        return GaussianMixture1D(
            means=tuple(config.means),
            weights=tuple(config.weights),
            stddev=config.stddev,
            component_labels=tuple(config.component_labels) if config.component_labels else None,
        )

    points = load_csv(
        config.path,
        label_column=config.label_column,
        header=config.header,
        label_map=config.label_map,
    )
    if config.normalize:
        points, report = preprocess_points(points, config.d_target)
        logger.info(
            "Dataset preprocessed",
            path=config.path,
            rows=len(points),
            input_dim=report.input_dim,
            output_dim=report.output_dim,
            pca_applied=report.projection is not None,
        )
    points = _match_supervision(points, victim)
    if points[0].dim != victim.d:
        raise ConfigError(f"dataset has dimension {points[0].dim} after preprocessing, victim expects d={victim.d}")
    return DatasetResample(points=tuple(points))


def _match_supervision(points: Sequence[DataPoint], victim: VictimSpec) -> List[DataPoint]:
    if victim.supervised:
        if not all(p.labeled for p in points):
            raise ConfigError("logreg victim needs a labeled dataset (set label_column)")
        return list(points)
    return [p.without_label() if p.labeled else p for p in points]
