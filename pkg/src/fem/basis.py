"""
Element bases.

Trial and test spaces use Legendre polynomials mapped affinely from [-1, 1]
(orthogonal in L2 on every element). The cubic Hermite basis carries the
nodal data of a trace, ordered (value-left, derivative-left, value-right,
derivative-right) like the element trace map.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np
from numpy.polynomial import legendre as L
from numpy.polynomial import polynomial as P

BasisKind = Literal["trial", "test", "hermite"]

MAX_DERIV = 2

# power-basis coefficients in s = (x - a) / h; the derivative shapes carry an extra factor h
_HERMITE_COEFFS = np.array(
    [
        [1.0, 0.0, -3.0, 2.0],
        [0.0, 1.0, -2.0, 1.0],
        [0.0, 0.0, 3.0, -2.0],
        [0.0, 0.0, -1.0, 1.0],
    ]
).T
_HERMITE_H_SCALED = np.array([False, True, False, True])

@dataclass(frozen=True)
class PolyBasis:
    degree: int
    kind: BasisKind

    def __post_init__(self) -> None:
        if self.degree < 0:
            raise ValueError(f"degree must be nonnegative, got {self.degree}")
        if self.kind == "hermite" and self.degree != 3:
            raise ValueError("the Hermite basis is cubic")

    @property
    def size(self) -> int:
        return 4 if self.kind == "hermite" else self.degree + 1

def trial_basis(p: int) -> PolyBasis:
    return PolyBasis(p, "trial")

def enriched_basis(p: int) -> PolyBasis:
    # enriched by three degrees
    return PolyBasis(p + 3, "test")

HERMITE = PolyBasis(3, "hermite")

@lru_cache(maxsize=None)
def _legendre_derivative_matrix(degree: int, m: int) -> np.ndarray:
    D = np.zeros((degree + 1, degree + 1))
    for k in range(degree + 1):
        c = L.legder(np.eye(degree + 1)[k], m) if m else np.eye(degree + 1)[k]
        D[: c.size, k] = c
    D.setflags(write=False)
    return D

@lru_cache(maxsize=None)
def _hermite_derivative_matrix(m: int) -> np.ndarray:
    D = np.zeros((4, 4))
    for k in range(4):
        c = P.polyder(_HERMITE_COEFFS[:, k], m) if m else _HERMITE_COEFFS[:, k]
        D[: c.size, k] = c
    D.setflags(write=False)
    return D

def _check_deriv(deriv: int) -> None:
    if not 0 <= deriv <= MAX_DERIV:
        raise ValueError(f"derivative order must be 0, 1 or 2, got {deriv}")

def basis_values(b: PolyBasis, element: tuple[float, float], x: np.ndarray, deriv: int = 0) -> np.ndarray:
    """Matrix (len(x), b.size) of basis functions (or derivatives) at physical points x."""
    _check_deriv(deriv)
    a, e = element
    h = e - a
    x = np.atleast_1d(np.asarray(x, dtype=float))

    if b.kind == "hermite":
        s = (x - a) / h
        V = P.polyvander(s, 3) @ _hermite_derivative_matrix(deriv)
        V = V / h**deriv
        V[:, _HERMITE_H_SCALED] *= h
        return V

    xi = 2.0 * (x - a) / h - 1.0
    V = L.legvander(xi, b.degree) @ _legendre_derivative_matrix(b.degree, deriv)
    return V * (2.0 / h) ** deriv

def eval_basis(b: PolyBasis, element: tuple[float, float], point: float, deriv: int = 0) -> np.ndarray:
    a, e = element
    tol = 1e-12 * max(1.0, abs(a), abs(e))
    if not (a - tol <= point <= e + tol):
        raise ValueError(f"point {point} outside element ({a}, {e})")
    return basis_values(b, element, np.array([point]), deriv)[0]

def legendre_mass(degree: int, h: float) -> np.ndarray:
    """Diagonal of the element L2 Gram matrix of the Legendre basis."""
    k = np.arange(degree + 1)
    return h / (2 * k + 1)
