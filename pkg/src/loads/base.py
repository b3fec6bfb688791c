from abc import ABC, abstractmethod

import numpy as np

class Load(ABC):
    name: str

    @abstractmethod
    def f(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @abstractmethod
    def antiderivative(self, k: int, x: np.ndarray) -> np.ndarray:
        """
        F_k with F_k' = F_{k-1} and F_0 = f, for k = 1..4.
        Any choice of integration constants works; the exact solver absorbs them.
        """
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r})"
