from math import factorial

import numpy as np

from src.loads.base import Load

class ConstantLoad(Load):
    """Uniformly distributed load f(x) = c."""

    name = "const"

    def __init__(self, value: float = 1.0):
        self.value = float(value)

    def f(self, x: np.ndarray) -> np.ndarray:
        return np.full_like(np.asarray(x, dtype=float), self.value)

    def antiderivative(self, k: int, x: np.ndarray) -> np.ndarray:
        if not 1 <= k <= 4:
            raise ValueError(f"antiderivative order must be 1..4, got {k}")
        x = np.asarray(x, dtype=float)
        return self.value * x**k / factorial(k)

class ZeroLoad(ConstantLoad):
    name = "zero"

    def __init__(self):
        super().__init__(0.0)
