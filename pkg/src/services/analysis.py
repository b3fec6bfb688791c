from __future__ import annotations

import logging
import math
from typing import Callable, Sequence

import numpy as np

from src.fem.basis import basis_values, trial_basis
from src.fem.mesh import Mesh
from src.fem.quadrature import QuadRule, gauss_legendre
from src.fem.trace import nodal_trace, trace_norm_parts
from src.models import ERROR_FIELDS, ConvergenceRecord, DpgSolution, dof_count
from src.services.dpg_core import GlobalSystem
from src.services.exact_solution import ExactSolution, l2_project
from src.utils.linalg import BandedCholesky, estimate_condition

log = logging.getLogger("analysis")

# signalling value of estimate_rate when every error vanishes
EXACT = math.inf

def l2_error(coeffs: np.ndarray, g: Callable[[np.ndarray], np.ndarray], mesh: Mesh, rule: QuadRule) -> float:
    """||g - v_h|| for a piecewise Legendre expansion v_h with coefficients (n, p+1)."""
    basis = trial_basis(coeffs.shape[1] - 1)
    total = 0.0
    for j, element in enumerate(mesh.elements()):
        x, w = rule.mapped(element)
        diff = np.asarray(g(x), dtype=float) - basis_values(basis, element, x) @ coeffs[j]
        total += float(w @ diff**2)
    return math.sqrt(total)

def compute_errors(
    sol: DpgSolution,
    exact: ExactSolution,
    *,
    level: int = 0,
    error_quad_extra: int = 8,
) -> ConvergenceRecord:
    mesh, p = sol.mesh, sol.p
    rule = gauss_legendre(p + error_quad_extra)

    proj_u = l2_project(exact.u, mesh, p, rule)
    proj_M = l2_project(exact.M, mesh, p, rule)

    exact_trace = nodal_trace(mesh, exact.u, exact.du, exact.M, exact.dM)
    trace_u, trace_M = trace_norm_parts(exact_trace - sol.trace.nodal, mesh)

    return ConvergenceRecord(
        level=level,
        n=mesh.n,
        dofs=dof_count(mesh.n, p),
        h=mesh.max_h,
        err_u=l2_error(sol.u_coeffs, exact.u, mesh, rule),
        err_M=l2_error(sol.M_coeffs, exact.M, mesh, rule),
        proj_u=l2_error(proj_u, exact.u, mesh, rule),
        proj_M=l2_error(proj_M, exact.M, mesh, rule),
        trace_u=trace_u,
        trace_M=trace_M,
        residual=sol.residual,
        t=sol.t,
        p=p,
    )

def estimate_rate(records: Sequence[ConvergenceRecord], field: str) -> float:
    """Least-squares slope of log(error) against log(h)."""
    if field not in ERROR_FIELDS:
        raise ValueError(f"unknown error field {field!r}")
    usable = [r for r in records if not r.failed]
    if len(usable) < 2:
        raise ValueError("a rate needs at least two records")

    h = np.array([r.h for r in usable])
    err = np.array([getattr(r, field) for r in usable])
    if np.all(err == 0.0):
        return EXACT

    keep = err > 0.0
    h, err = h[keep], err[keep]
    if h.size < 2:
        return EXACT
    if np.unique(h).size < 2:
        raise ValueError("a rate needs at least two distinct mesh sizes")

    slope, _ = np.polyfit(np.log(h), np.log(err), 1)
    return float(slope)

def condition_number(system: GlobalSystem, *, iterations: int = 300, permute: bool = True) -> float:
    factor = BandedCholesky(system.matrix, permute=permute)
    cond = estimate_condition(system.matrix, factor, iterations)
    log.debug("condition estimate n=%d p=%d: %.3e", system.dof_map.mesh.n, system.p, cond)
    return cond
