import numpy as np

from src.loads.base import Load

class SineLoad(Load):
    """f(x) = sin(pi x)."""

    name = "sin"

    def f(self, x: np.ndarray) -> np.ndarray:
        return np.sin(np.pi * np.asarray(x, dtype=float))

    def antiderivative(self, k: int, x: np.ndarray) -> np.ndarray:
        if not 1 <= k <= 4:
            raise ValueError(f"antiderivative order must be 1..4, got {k}")
        arg = np.pi * np.asarray(x, dtype=float)
        # sin -> -cos/pi -> -sin/pi^2 -> cos/pi^3 -> sin/pi^4
        sign, trig = [(-1.0, np.cos), (-1.0, np.sin), (1.0, np.cos), (1.0, np.sin)][k - 1]
        return sign * trig(arg) / np.pi**k
