from typing import Optional

import numpy as np


class PoisonCtlError(Exception):
    pass


class InvalidArgumentError(PoisonCtlError, ValueError):
    pass


class ShapeMismatchError(PoisonCtlError, ValueError):
    pass


class LabelError(PoisonCtlError, ValueError):
    pass


class ConfigError(PoisonCtlError, ValueError):
    pass


class DataError(PoisonCtlError, ValueError):

    def __init__(self, message: str, row: Optional[int] = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class DivergedError(PoisonCtlError, ArithmeticError):

    def __init__(self, message: str, last_finite_actions: Optional[np.ndarray] = None, iteration: int = 0):
        super().__init__(f"diverged: {message}")
        self.last_finite_actions = last_finite_actions
        self.iteration = iteration


class EpisodeError(PoisonCtlError):

    def __init__(self, step: int, cause: Exception):
        super().__init__(f"episode failed at step {step}: {cause}")
        self.step = step
        self.cause = cause
