"""
Closed-form solutions of  -M'' = f,  M - t^2 M'' + u'' = 0  on (0, 1).

With antiderivatives F_k of the load (F_2'' = f, F_4'''' = f):

    M  = -F_2 + c1 x + c2
    u  = -t^2 F_2 + F_4 - c1 x^3/6 - c2 x^2/2 + c3 x + c4

The constants come from the four homogeneous boundary conditions.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from src.errors import SolverError
from src.fem.basis import basis_values, legendre_mass, trial_basis
from src.fem.mesh import Mesh
from src.fem.quadrature import QuadRule, gauss_legendre
from src.loads import Load, SineLoad
from src.models import END_KINDS, BoundaryCondition, validate_bc, validate_thickness

log = logging.getLogger("exact_solution")

def _poly_rows(x: float) -> dict[str, np.ndarray]:
    # coefficients of (c1, c2, c3, c4) in each quantity
    return {
        "u": np.array([-x**3 / 6.0, -x**2 / 2.0, x, 1.0]),
        "du": np.array([-x**2 / 2.0, -x, 1.0, 0.0]),
        "M": np.array([x, 1.0, 0.0, 0.0]),
        "dM": np.array([1.0, 0.0, 0.0, 0.0]),
    }

@dataclass(frozen=True)
class ExactSolution:
    bc: BoundaryCondition
    t: float
    load: Load
    c: tuple[float, float, float, float]

    def _F(self, k: int, x: np.ndarray) -> np.ndarray:
        return self.load.antiderivative(k, x)

    def M(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        c1, c2, _, _ = self.c
        return -self._F(2, x) + c1 * x + c2

    def dM(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return -self._F(1, x) + self.c[0]

    def ddM(self, x: np.ndarray) -> np.ndarray:
        return -self.load.f(x)

    def u(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        c1, c2, c3, c4 = self.c
        t2 = self.t**2
        return -t2 * self._F(2, x) + self._F(4, x) - c1 * x**3 / 6.0 - c2 * x**2 / 2.0 + c3 * x + c4

    def du(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        c1, c2, c3, _ = self.c
        t2 = self.t**2
        return -t2 * self._F(1, x) + self._F(3, x) - c1 * x**2 / 2.0 - c2 * x + c3

    def ddu(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        c1, c2, _, _ = self.c
        return -self.t**2 * self.load.f(x) + self._F(2, x) - c1 * x - c2

    def boundary_values(self) -> dict[str, float]:
        """The four quantities that the boundary condition forces to zero."""
        out: dict[str, float] = {}
        for x, kind in zip((0.0, 1.0), END_KINDS[self.bc]):
            side = "0" if x == 0.0 else "1"
            if kind == "clamped":
                out[f"u({side})"] = float(self.u(x))
                out[f"u'-t2M'({side})"] = float(self.du(x) - self.t**2 * self.dM(x))
            elif kind == "supported":
                out[f"u({side})"] = float(self.u(x))
                out[f"M({side})"] = float(self.M(x))
            else:
                out[f"M({side})"] = float(self.M(x))
                out[f"M'({side})"] = float(self.dM(x))
        return out

def solve_exact(bc: str, t: float, load: Load | None = None) -> ExactSolution:
    bc = validate_bc(bc)
    t = validate_thickness(t)
    load = load or SineLoad()
    t2 = t * t

    def particular(x: float) -> dict[str, float]:
        F = {k: float(load.antiderivative(k, np.array(x))) for k in (1, 2, 3, 4)}
        return {
            "u": -t2 * F[2] + F[4],
            "du": -t2 * F[1] + F[3],
            "M": -F[2],
            "dM": -F[1],
        }

    A = np.zeros((4, 4))
    rhs = np.zeros(4)
    row = 0
    for x, kind in zip((0.0, 1.0), END_KINDS[bc]):
        g = _poly_rows(x)
        a = particular(x)
        if kind == "clamped":
            conditions = [(g["u"], a["u"]), (g["du"] - t2 * g["dM"], a["du"] - t2 * a["dM"])]
        elif kind == "supported":
            conditions = [(g["u"], a["u"]), (g["M"], a["M"])]
        else:
            conditions = [(g["M"], a["M"]), (g["dM"], a["dM"])]
        for coeffs, value in conditions:
            A[row] = coeffs
            rhs[row] = -value
            row += 1

    try:
        c = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as ex:
        raise SolverError(f"boundary system for bc={bc}, t={t} is singular") from ex

    log.debug("exact solution bc=%s t=%g load=%s constants=%s", bc, t, load.name, c)
    return ExactSolution(bc=bc, t=t, load=load, c=(float(c[0]), float(c[1]), float(c[2]), float(c[3])))

def l2_project(g, mesh: Mesh, p: int, rule: QuadRule | None = None) -> np.ndarray:
    """Elementwise L2 projection onto degree-p polynomials, as Legendre coefficients of shape (n, p+1)."""
    rule = rule or gauss_legendre(p + 8)
    basis = trial_basis(p)
    coeffs = np.empty((mesh.n, p + 1))
    for j, element in enumerate(mesh.elements()):
        x, w = rule.mapped(element)
        V = basis_values(basis, element, x)
        gx = np.broadcast_to(np.asarray(g(x), dtype=float), x.shape)
        # the element mass matrix of the Legendre basis is diagonal
        coeffs[j] = ((w * gx) @ V) / legendre_mass(p, element[1] - element[0])
    return coeffs
