from core.types import ControlState, DataPoint
from attackers.base import Attacker
from models import PolicyKind


class NullAttacker(Attacker):
    policy = PolicyKind.NULL

    def act(self, state: ControlState) -> DataPoint:
        return state.incoming


def act_null(state: ControlState) -> DataPoint:
    return state.incoming
