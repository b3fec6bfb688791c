from dataclasses import dataclass

import numpy as np

@dataclass(frozen=True)
class Mesh:
    """Partition 0 = x_0 < x_1 < ... < x_n = 1 of the unit interval."""

    nodes: tuple[float, ...]

    def __post_init__(self) -> None:
        nodes = tuple(float(x) for x in self.nodes)
        object.__setattr__(self, "nodes", nodes)

        if len(nodes) < 2:
            raise ValueError("a mesh needs at least one element")
        if nodes[0] != 0.0 or nodes[-1] != 1.0:
            raise ValueError(f"mesh must span [0, 1], got [{nodes[0]}, {nodes[-1]}]")
        if any(b <= a for a, b in zip(nodes, nodes[1:])):
            raise ValueError("mesh nodes must be strictly increasing")

    @property
    def n(self) -> int:
        return len(self.nodes) - 1

    @property
    def h(self) -> np.ndarray:
        return np.diff(np.asarray(self.nodes))

    @property
    def max_h(self) -> float:
        return float(self.h.max())

    def element(self, j: int) -> tuple[float, float]:
        # 0-based: element j is (x_j, x_{j+1})
        return self.nodes[j], self.nodes[j + 1]

    def elements(self) -> list[tuple[float, float]]:
        return [self.element(j) for j in range(self.n)]

    def locate(self, x: np.ndarray) -> np.ndarray:
        """Index of the element containing each point; nodes go to the element on their left."""
        idx = np.searchsorted(np.asarray(self.nodes), np.asarray(x, dtype=float), side="left") - 1
        return np.clip(idx, 0, self.n - 1)

def uniform_mesh(n: int) -> Mesh:
    if n < 1:
        raise ValueError(f"number of elements must be positive, got {n}")
    nodes = [j / n for j in range(n + 1)]
    return Mesh(tuple(nodes))

def refine_uniform(mesh: Mesh) -> Mesh:
    nodes: list[float] = [mesh.nodes[0]]
    for a, b in mesh.elements():
        nodes.append(0.5 * (a + b))
        nodes.append(b)
    return Mesh(tuple(nodes))
