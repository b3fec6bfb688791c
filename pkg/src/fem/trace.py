"""
Trace unknowns of the ultraweak formulation.

A trace is stored per node as (u, u', M, M'); node i owns nodal indices
4i..4i+3. Homogeneous boundary conditions are eliminated with a constraint
basis R whose 4n columns span the admissible traces for (bc, t). The only
t-dependence is the clamped coupling u' = t^2 M'.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

import numpy as np
from scipy import sparse

from src.fem.basis import PolyBasis, basis_values
from src.fem.mesh import Mesh
from src.models import END_KINDS, BoundaryCondition, validate_bc, validate_thickness

log = logging.getLogger("trace")

U, DU, M, DM = 0, 1, 2, 3
PER_NODE = 4

_REMOVED_BY_END = {
    "clamped": (U, DU),
    "supported": (U, M),
    "free": (M, DM),
}

class ElementPolynomial(Protocol):
    def __call__(self, x: float) -> float: ...
    def deriv(self, m: int = 1) -> ElementPolynomial: ...

@dataclass(frozen=True, eq=False)
class TraceDofMap:
    mesh: Mesh
    bc: BoundaryCondition
    t: float

    # (4(n+1), 4n) constraint basis
    R: sparse.csr_matrix
    # nodal indices kept as free unknowns; R restricted to these rows is the identity
    free: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.free.size)

    @property
    def nodal_size(self) -> int:
        return PER_NODE * (self.mesh.n + 1)

    def element_rows(self, j: int) -> np.ndarray:
        """Nodal indices touched by element j: left node then right node."""
        return np.arange(PER_NODE * j, PER_NODE * (j + 2))

@dataclass(eq=False)
class TraceVector:
    dof_map: TraceDofMap
    coefficients: np.ndarray

    @property
    def nodal(self) -> np.ndarray:
        return self.dof_map.R @ self.coefficients

    @classmethod
    def from_nodal(cls, dof_map: TraceDofMap, nodal: np.ndarray) -> TraceVector:
        return cls(dof_map, np.asarray(nodal, dtype=float)[dof_map.free].copy())

    @classmethod
    def from_functions(
        cls,
        dof_map: TraceDofMap,
        u: Callable[[np.ndarray], np.ndarray],
        du: Callable[[np.ndarray], np.ndarray],
        M_: Callable[[np.ndarray], np.ndarray],
        dM: Callable[[np.ndarray], np.ndarray],
    ) -> TraceVector:
        return cls.from_nodal(dof_map, nodal_trace(dof_map.mesh, u, du, M_, dM))

def nodal_trace(mesh: Mesh, u, du, M_, dM) -> np.ndarray:
    """gamma_h of two H^2(I) functions, as a 4(n+1) nodal vector."""
    x = np.asarray(mesh.nodes)
    N = np.stack([np.broadcast_to(np.asarray(g(x), dtype=float), x.shape) for g in (u, du, M_, dM)], axis=1)
    return N.ravel()

def build_dof_map(mesh: Mesh, bc: str, t: float) -> TraceDofMap:
    bc = validate_bc(bc)
    t = validate_thickness(t)
    n = mesh.n
    nodal_size = PER_NODE * (n + 1)

    removed: set[int] = set()
    coupled: dict[int, int] = {}  # M' index -> u' index it also drives
    for node, kind in zip((0, n), END_KINDS[bc]):
        base = PER_NODE * node
        removed.update(base + k for k in _REMOVED_BY_END[kind])
        if kind == "clamped" and t != 0.0:
            coupled[base + DM] = base + DU

    free = np.array([i for i in range(nodal_size) if i not in removed], dtype=int)
    if free.size != 4 * n:
        raise AssertionError(f"trace space has dimension {free.size}, expected {4 * n}")

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for col, i in enumerate(free):
        rows.append(int(i))
        cols.append(col)
        vals.append(1.0)
        if i in coupled:
            rows.append(coupled[i])
            cols.append(col)
            vals.append(t * t)

    R = sparse.csr_matrix((vals, (rows, cols)), shape=(nodal_size, free.size))
    log.debug("trace map bc=%s t=%g n=%d: %d free of %d nodal", bc, t, n, free.size, nodal_size)
    return TraceDofMap(mesh=mesh, bc=bc, t=t, R=R, free=free)

def _node_weights(t: float, z, dz, W, dW) -> np.ndarray:
    # multipliers of (u, u', M, M') in  -u W' + M' z - M (z' - t^2 W') + (u' - t^2 M') W
    t2 = t * t
    return np.array([-dW, W, -dz + t2 * dW, z - t2 * W])

def _as_nodal(q: TraceVector | np.ndarray) -> np.ndarray:
    if isinstance(q, TraceVector):
        return q.nodal
    return np.asarray(q, dtype=float)

def pairing(
    q: TraceVector | np.ndarray,
    tests: Sequence[tuple[ElementPolynomial, ElementPolynomial]],
    mesh: Mesh,
    t: float,
) -> float:
    """<q, (z, W)>_t with (z, W) given elementwise; test evaluations come from the element's own piece."""
    if len(tests) != mesh.n:
        raise ValueError(f"need one test pair per element, got {len(tests)} for {mesh.n} elements")
    nodal = _as_nodal(q).reshape(-1, PER_NODE)

    total = 0.0
    for j, (z, W) in enumerate(tests):
        dz, dW = z.deriv(), W.deriv()
        for node, sign in ((j, -1.0), (j + 1, 1.0)):
            x = mesh.nodes[node]
            w = _node_weights(t, z(x), dz(x), W(x), dW(x))
            total += sign * float(w @ nodal[node])
    return total

def local_pairing_matrix(element: tuple[float, float], t: float, basis: PolyBasis) -> np.ndarray:
    """
    (8, 2 * basis.size) matrix of the pairing on one element.

    Rows are the nodal trace values (u, u', M, M') at the left then right node;
    columns are the z-component test functions followed by the W-component ones.
    """
    ends = np.array(element)
    V = basis_values(basis, element, ends, 0)
    dV = basis_values(basis, element, ends, 1)
    zero = np.zeros(basis.size)

    out = np.zeros((2 * PER_NODE, 2 * basis.size))
    for k, sign in ((0, -1.0), (1, 1.0)):
        rows = slice(PER_NODE * k, PER_NODE * (k + 1))
        out[rows, : basis.size] = sign * _node_weights(t, V[k], dV[k], zero, zero)
        out[rows, basis.size :] = sign * _node_weights(t, zero, zero, V[k], dV[k])
    return out

def hermite_mass(h: float) -> np.ndarray:
    """L2 Gram of the cubic Hermite basis, ordering (u_l, u_r, u'_l, u'_r)."""
    return h / 420.0 * np.array(
        [
            [156.0, 54.0, 22.0 * h, -13.0 * h],
            [54.0, 156.0, 13.0 * h, -22.0 * h],
            [22.0 * h, 13.0 * h, 4.0 * h**2, -3.0 * h**2],
            [-13.0 * h, -22.0 * h, -3.0 * h**2, 4.0 * h**2],
        ]
    )

def hermite_curvature_sq(h, v) -> np.ndarray:
    """
    Integral of (v'')^2 over each element for the Hermite cubic with data v.

    `h` has shape (n,) and `v` has rows (v_l, v_r, v'_l, v'_r). The curvature is
    linear on the element: the integral is h * mean^2 plus the slope term.
    """
    h = np.asarray(h, dtype=float)
    v = np.atleast_2d(v)
    mean = h * (v[:, 3] - v[:, 2])
    slope = 12.0 * (v[:, 0] - v[:, 1]) + 6.0 * h * (v[:, 2] + v[:, 3])
    return (mean**2 + slope**2 / 12.0) / h**3

def element_norm_sq(h, v) -> np.ndarray:
    """||v||^2 + ||v''||^2 of the Hermite interpolant, one value per element."""
    h = np.asarray(h, dtype=float)
    v = np.atleast_2d(v)
    Mass = np.stack([hermite_mass(hj) for hj in np.atleast_1d(h)])
    return np.einsum("ei,eij,ej->e", v, Mass, v) + hermite_curvature_sq(h, v)

def _element_data(nodal: np.ndarray, value: int) -> np.ndarray:
    # per element (v_l, v_r, v'_l, v'_r) for the field whose value sits at offset `value`
    N = nodal.reshape(-1, PER_NODE)
    return np.stack([N[:-1, value], N[1:, value], N[:-1, value + 1], N[1:, value + 1]], axis=1)

def element_trace_norms_sq(q: TraceVector | np.ndarray, mesh: Mesh) -> np.ndarray:
    """(n, 2) array of ||gamma_j(u)||_j^2 and ||gamma_j(M)||_j^2."""
    nodal = _as_nodal(q)
    out = np.empty((mesh.n, 2))
    for col, value in enumerate((U, M)):
        v = _element_data(nodal, value)
        out[:, col] = element_norm_sq(mesh.h, v)
    return out

def trace_norm_parts(q: TraceVector | np.ndarray, mesh: Mesh) -> tuple[float, float]:
    sq = element_trace_norms_sq(q, mesh).sum(axis=0)
    return float(np.sqrt(sq[0])), float(np.sqrt(sq[1]))

def trace_norm(q: TraceVector | np.ndarray, mesh: Mesh) -> float:
    return float(np.sqrt(element_trace_norms_sq(q, mesh).sum()))
