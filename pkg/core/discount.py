from typing import Sequence

from errors import InvalidArgumentError


def validate_gamma(gamma: float) -> float:
    if not 0.0 < gamma < 1.0:
        raise InvalidArgumentError(f"invalid discount: {gamma}")
    return float(gamma)


def discount_weight(gamma: float, t: int) -> float:
    return gamma ** t


def discounted_cumulative_cost(costs: Sequence[float], gamma: float) -> float:
    if len(costs) == 0:
        raise InvalidArgumentError("empty cost trace")
    gamma = validate_gamma(gamma)
    total = 0.0
    for t, cost in enumerate(costs):
        total += discount_weight(gamma, t) * float(cost)
    return total
