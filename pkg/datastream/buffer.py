from typing import Iterable, List, Optional, Tuple

from core.rng import as_generator
from core.types import DataPoint
from errors import InvalidArgumentError, ShapeMismatchError


class EmpiricalBuffer:
    """Everything the attacker has observed: the pre-attack sample followed by
    z_0..z_t. Uniform draws from it realize the empirical distribution."""

    def __init__(self, pre_attack: Iterable[DataPoint] = ()):
        self._points: List[DataPoint] = []
        self._dim: Optional[int] = None
        for point in pre_attack:
            self.push(point)
        self.pre_attack_count = len(self._points)

    def __len__(self) -> int:
        return len(self._points)

    @property
    def points(self) -> Tuple[DataPoint, ...]:
        return tuple(self._points)

    @property
    def observed_count(self) -> int:
        return len(self._points) - self.pre_attack_count

    def push(self, point: DataPoint) -> "EmpiricalBuffer":
        if self._dim is None:
            self._dim = point.dim
        elif point.dim != self._dim:
            raise ShapeMismatchError(f"buffer holds {self._dim}-d points, got {point.dim}")
        self._points.append(point)
        return self

    def sample_trajectory(self, length: int, rng) -> List[DataPoint]:
        if not self._points:
            raise InvalidArgumentError("no data observed")
        if length < 1:
            raise InvalidArgumentError(f"trajectory length must be >= 1, got {length}")
        indices = as_generator(rng).integers(0, len(self._points), size=length)
        return [self._points[i] for i in indices]


def buffer_push(buf: EmpiricalBuffer, z: DataPoint) -> EmpiricalBuffer:
    return buf.push(z)


def buffer_sample_trajectory(buf: EmpiricalBuffer, length: int, rng) -> List[DataPoint]:
    return buf.sample_trajectory(length, rng)
