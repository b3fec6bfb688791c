import logging

import numpy as np
from scipy import linalg, sparse
from scipy.sparse.csgraph import reverse_cuthill_mckee

from src.errors import SolverError

log = logging.getLogger("linalg")

class BandedCholesky:
    """
    Cholesky factor of a sparse SPD matrix stored in banded form.

    With `permute` the unknowns are first reordered by reverse Cuthill–McKee,
    which brings the DPG normal matrix down to a bandwidth of O(p).
    """

    def __init__(self, A: sparse.spmatrix, permute: bool = True):
        m, n = A.shape
        if m != n:
            raise ValueError("Input matrix must be square")
        A = sparse.csr_matrix(A)

        if permute:
            self.perm = reverse_cuthill_mckee(A, symmetric_mode=True)
        else:
            self.perm = np.arange(n)
        Ap = A[self.perm][:, self.perm].tocoo()

        upper = Ap.col >= Ap.row
        rows, cols, vals = Ap.row[upper], Ap.col[upper], Ap.data[upper]
        self.bandwidth = int((cols - rows).max()) if vals.size else 0

        ab = np.zeros((self.bandwidth + 1, n))
        np.add.at(ab, (self.bandwidth + rows - cols, cols), vals)

        try:
            self._cb = linalg.cholesky_banded(ab, lower=False)
        except linalg.LinAlgError as ex:
            raise SolverError(f"global matrix of size {n} is not numerically positive definite") from ex
        log.debug("banded Cholesky: n=%d bandwidth=%d permuted=%s", n, self.bandwidth, permute)

    def solve(self, b: np.ndarray) -> np.ndarray:
        x = np.empty_like(b, dtype=float)
        x[self.perm] = linalg.cho_solve_banded((self._cb, False), b[self.perm])
        return x

def _power_iteration(apply, n: int, iterations: int, rtol: float = 1e-10) -> float:
    rng = np.random.default_rng(0)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for k in range(iterations):
        w = apply(v)
        lam_new = float(v @ w)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        if k and abs(lam_new - lam) <= rtol * abs(lam_new):
            log.debug("power iteration converged after %d steps", k)
            return lam_new
        lam = lam_new
    return lam

def estimate_condition(A: sparse.spmatrix, factor: BandedCholesky | None = None, iterations: int = 300) -> float:
    """lambda_max / lambda_min of an SPD matrix by power iteration on A and on A^-1."""
    A = sparse.csr_matrix(A)
    factor = factor or BandedCholesky(A)
    n = A.shape[0]
    lam_max = _power_iteration(lambda v: A @ v, n, iterations)
    inv_lam_min = _power_iteration(factor.solve, n, iterations)
    if inv_lam_min <= 0.0:
        raise SolverError("inverse power iteration did not produce a positive eigenvalue")
    return lam_max * inv_lam_min
