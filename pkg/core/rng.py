from dataclasses import dataclass

import numpy as np

from errors import InvalidArgumentError

_UINT64_LIMIT = 2**64


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream keyed by (seed, sequence_id).

    Every call to generator() starts at draw index 0, so a stream value can be
    shared between threads or processes and always replays the same draws.
    """

    seed: int
    sequence_id: int = 0

    def __post_init__(self):
        for name, value in (("seed", self.seed), ("sequence_id", self.sequence_id)):
            if not 0 <= int(value) < _UINT64_LIMIT:
                raise InvalidArgumentError(f"{name} must be a 64-bit unsigned integer, got {value}")
            object.__setattr__(self, name, int(value))

    @classmethod
    def root(cls, seed: int) -> "RngStream":
        return cls(seed=seed, sequence_id=0)

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.seed, spawn_key=(self.sequence_id,))

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(self.seed_sequence()))


def rng_fork(parent: RngStream, child_id: int) -> RngStream:
    child_key = int(child_id) % _UINT64_LIMIT
    mixer = np.random.SeedSequence(parent.seed, spawn_key=(parent.sequence_id, child_key))
    sequence_id = int(mixer.generate_state(1, dtype=np.uint64)[0])
    return RngStream(seed=parent.seed, sequence_id=sequence_id)


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    return rng
