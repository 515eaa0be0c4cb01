from abc import ABC, abstractmethod

from core.types import ControlState, DataPoint
from models import PolicyKind


class Attacker(ABC):
    policy: PolicyKind

    @abstractmethod
    def act(self, state: ControlState) -> DataPoint:
        """Return a_t for s_t = [theta_t, z_t]; the label is never changed."""
