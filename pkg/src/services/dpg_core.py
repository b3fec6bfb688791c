"""
DPG assembly for the ultraweak Timoshenko formulation.

The V inner product is broken over elements, so the optimal test functions
are computed element by element and never formed globally: each element
contributes B G^-1 B^T to the normal matrix and B G^-1 l to the right-hand
side. Unknowns are ordered (u, M) field coefficients per element, then the
free trace unknowns.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from numpy.polynomial import legendre as L
from scipy import linalg, sparse

from src.errors import SolverError
from src.fem.basis import PolyBasis, basis_values, enriched_basis, trial_basis
from src.fem.mesh import Mesh
from src.fem.quadrature import QuadRule, assembly_rule
from src.fem.trace import TraceDofMap, TraceVector, build_dof_map, local_pairing_matrix
from src.loads import Load
from src.models import DpgSolution, ElementSystem, dof_count
from src.utils.linalg import BandedCholesky

log = logging.getLogger("dpg_core")

LoadLike = Union[Load, Callable[[np.ndarray], np.ndarray]]

@dataclass
class GlobalSystem:
    matrix: sparse.csr_matrix
    rhs: np.ndarray
    systems: list[ElementSystem]
    dof_map: TraceDofMap
    p: int
    # Cholesky factors of the element Gram matrices, aligned with `systems`
    grams: list[GramSolver] = field(default_factory=list)

def _load_function(f: LoadLike) -> Callable[[np.ndarray], np.ndarray]:
    return f.f if isinstance(f, Load) else f

def element_gram(element: tuple[float, float], test: PolyBasis, rule: QuadRule | None = None) -> np.ndarray:
    """Gram matrix of (z, dz) + (z'', dz'') + (W, dW) + (W'', dW'') on one element."""
    rule = rule or assembly_rule(test.degree - 3)
    x, w = rule.mapped(element)
    V = basis_values(test, element, x, 0)
    D2 = basis_values(test, element, x, 2)
    block = V.T @ (w[:, None] * V) + D2.T @ (w[:, None] * D2)
    return linalg.block_diag(block, block)

def element_bilinear(
    element: tuple[float, float],
    t: float,
    trial: PolyBasis,
    test: PolyBasis,
    rule: QuadRule | None = None,
) -> np.ndarray:
    """
    Rows: u coefficients, M coefficients, then the 8 nodal trace values of the element.
    Columns: z-component then W-component test functions.
    """
    rule = rule or assembly_rule(trial.degree)
    x, w = rule.mapped(element)
    psi = basis_values(trial, element, x, 0) * w[:, None]
    V = basis_values(test, element, x, 0)
    D2 = basis_values(test, element, x, 2)

    nt, nv = trial.size, test.size
    B = np.zeros((2 * nt + 8, 2 * nv))
    B[:nt, nv:] = psi.T @ D2                      # (u, W'')
    B[nt : 2 * nt, :nv] = psi.T @ D2              # (M, z'')
    B[nt : 2 * nt, nv:] = psi.T @ (V - t * t * D2)  # (M, W - t^2 W'')
    B[2 * nt :] = local_pairing_matrix(element, t, test)
    return B

def element_load(element: tuple[float, float], f: LoadLike, test: PolyBasis, rule: QuadRule | None = None) -> np.ndarray:
    """L_f(z, W) = -(f, z) on one element."""
    rule = rule or assembly_rule(test.degree - 3)
    x, w = rule.mapped(element)
    fx = np.broadcast_to(np.asarray(_load_function(f)(x), dtype=float), x.shape)
    V = basis_values(test, element, x, 0)
    l = np.zeros(2 * test.size)
    l[: test.size] = -(w * fx) @ V
    return l

class GramSolver:
    """Cholesky of a local Gram matrix after symmetric diagonal scaling."""

    def __init__(self, G: np.ndarray):
        diag = np.diag(G)
        if np.any(diag <= 0.0):
            raise SolverError("local Gram matrix has a nonpositive diagonal entry")
        self._d = 1.0 / np.sqrt(diag)
        try:
            self._factor = linalg.cho_factor(self._d[:, None] * G * self._d[None, :])
        except linalg.LinAlgError as ex:
            raise SolverError("local Gram matrix is singular") from ex

    def solve(self, b: np.ndarray) -> np.ndarray:
        d = self._d if b.ndim == 1 else self._d[:, None]
        return d * linalg.cho_solve(self._factor, d * b)

def _field_dofs(j: int, p: int) -> np.ndarray:
    per = 2 * (p + 1)
    return np.arange(j * per, (j + 1) * per)

def element_system(
    j: int,
    dof_map: TraceDofMap,
    p: int,
    f: LoadLike,
    rule: QuadRule,
) -> ElementSystem:
    mesh = dof_map.mesh
    element = mesh.element(j)
    trial, test = trial_basis(p), enriched_basis(p)

    B_full = element_bilinear(element, dof_map.t, trial, test, rule)
    G = element_gram(element, test, rule)
    l = element_load(element, f, test, rule)

    # reduce the nodal trace rows to the free unknowns they depend on
    Rj = dof_map.R[dof_map.element_rows(j)]
    cols = np.unique(Rj.indices)
    R_local = Rj[:, cols].toarray()
    nf = 2 * (p + 1)
    B = np.vstack([B_full[:nf], R_local.T @ B_full[nf:]])

    dofs = np.concatenate([_field_dofs(j, p), 2 * mesh.n * (p + 1) + cols])
    return ElementSystem(B=B, G=G, l=l, dofs=dofs)

def assemble(
    mesh: Mesh,
    bc: str,
    t: float,
    p: int,
    f: LoadLike,
    *,
    quad_extra: int = 5,
) -> GlobalSystem:
    if p < 0:
        raise ValueError(f"polynomial degree must be nonnegative, got {p}")
    dof_map = build_dof_map(mesh, bc, t)
    rule = assembly_rule(p, quad_extra)
    size = dof_count(mesh.n, p)

    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    rhs = np.zeros(size)
    systems: list[ElementSystem] = []
    grams: list[GramSolver] = []

    for j in range(mesh.n):
        es = element_system(j, dof_map, p, f, rule)
        gram = GramSolver(es.G)
        Ginv_Bt = gram.solve(es.B.T)
        A_e = es.B @ Ginv_Bt
        A_e = 0.5 * (A_e + A_e.T)

        r, c = np.meshgrid(es.dofs, es.dofs, indexing="ij")
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(A_e.ravel())
        rhs[es.dofs] += Ginv_Bt.T @ es.l
        systems.append(es)
        grams.append(gram)

    A = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(size, size),
    )
    log.debug("assembled bc=%s t=%g p=%d n=%d: %d unknowns, %d nonzeros", dof_map.bc, dof_map.t, p, mesh.n, size, A.nnz)
    return GlobalSystem(matrix=A, rhs=rhs, systems=systems, dof_map=dof_map, p=p, grams=grams)

def residual_norm(
    solution: DpgSolution,
    systems: list[ElementSystem],
    grams: list[GramSolver] | None = None,
) -> float:
    """||L - b(x_h, T .)||_V' = (sum_e r_e^T G_e^-1 r_e)^(1/2) with r_e = l_e - B_e^T x_e."""
    grams = grams or [GramSolver(es.G) for es in systems]
    total = 0.0
    for es, gram in zip(systems, grams):
        r = es.l - es.B.T @ solution.x[es.dofs]
        total += max(0.0, float(r @ gram.solve(r)))
    return float(np.sqrt(total))

def normal_residual(system: GlobalSystem, x: np.ndarray) -> np.ndarray:
    """rhs - A x summed element by element as B_e G_e^-1 (l_e - B_e^T x_e), without the assembled A."""
    g = np.zeros_like(x)
    for es, gram in zip(system.systems, system.grams):
        g[es.dofs] += es.B @ gram.solve(es.l - es.B.T @ x[es.dofs])
    return g

def solve(system: GlobalSystem, *, permute: bool = True, refinement_steps: int = 2) -> DpgSolution:
    """
    Banded Cholesky solve of the normal equations followed by iterative refinement.

    Each refinement step corrects x with the residual of the unassembled normal
    equations; the assembled matrix is only used through its factor.
    """
    if refinement_steps < 0:
        raise ValueError(f"refinement steps must be nonnegative, got {refinement_steps}")
    if len(system.grams) != len(system.systems):
        system.grams = [GramSolver(es.G) for es in system.systems]

    factor = BandedCholesky(system.matrix, permute=permute)
    x = factor.solve(system.rhs)
    for step in range(refinement_steps):
        dx = factor.solve(normal_residual(system, x))
        x += dx
        log.debug("refinement step %d: |dx| = %.3e, |x| = %.3e", step + 1, np.linalg.norm(dx), np.linalg.norm(x))

    mesh, p = system.dof_map.mesh, system.p
    nf = 2 * mesh.n * (p + 1)
    fields = x[:nf].reshape(mesh.n, 2, p + 1)
    sol = DpgSolution(
        mesh=mesh,
        p=p,
        bc=system.dof_map.bc,
        t=system.dof_map.t,
        u_coeffs=fields[:, 0, :].copy(),
        M_coeffs=fields[:, 1, :].copy(),
        trace=TraceVector(system.dof_map, x[nf:].copy()),
        x=x,
    )
    sol.residual = residual_norm(sol, system.systems, system.grams)
    return sol

def assemble_and_solve(
    mesh: Mesh,
    bc: str,
    t: float,
    p: int,
    f: LoadLike,
    *,
    quad_extra: int = 5,
    permute: bool = True,
    refinement_steps: int = 2,
) -> DpgSolution:
    system = assemble(mesh, bc, t, p, f, quad_extra=quad_extra)
    return solve(system, permute=permute, refinement_steps=refinement_steps)

def eval_field(coeffs: np.ndarray, mesh: Mesh, x: np.ndarray) -> np.ndarray:
    """Evaluate a piecewise Legendre expansion (n, p+1) at points x."""
    x = np.asarray(x, dtype=float)
    j = mesh.locate(x)
    nodes = np.asarray(mesh.nodes)
    a, h = nodes[j], mesh.h[j]
    xi = 2.0 * (x - a) / h - 1.0
    V = L.legvander(xi, coeffs.shape[1] - 1)
    return np.einsum("...k,...k->...", V, coeffs[j])
