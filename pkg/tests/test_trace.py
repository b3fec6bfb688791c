import numpy as np
import pytest
from numpy.polynomial import Legendre, Polynomial
from scipy.linalg import null_space

from src.fem.basis import PolyBasis, basis_values
from src.fem.mesh import uniform_mesh
from src.fem.quadrature import gauss_legendre
from src.fem.trace import (
    DM,
    DU,
    M,
    U,
    TraceVector,
    build_dof_map,
    element_norm_sq,
    hermite_curvature_sq,
    hermite_mass,
    local_pairing_matrix,
    nodal_trace,
    pairing,
    trace_norm,
    trace_norm_parts,
)
from src.models import BOUNDARY_CONDITIONS


def _constrained_values(nodal: np.ndarray, bc: str, t: float) -> list[float]:
    N = nodal.reshape(-1, 4)
    left, right = N[0], N[-1]
    t2 = t * t
    ends = {
        "cc": [left[U], left[DU] - t2 * left[DM], right[U], right[DU] - t2 * right[DM]],
        "cs": [left[U], left[DU] - t2 * left[DM], right[U], right[M]],
        "cf": [left[U], left[DU] - t2 * left[DM], right[M], right[DM]],
        "ss": [left[U], left[M], right[U], right[M]],
    }
    return ends[bc]


class TestDofMap:
    @pytest.mark.parametrize("bc", BOUNDARY_CONDITIONS)
    @pytest.mark.parametrize("t", [1.0, 0.3, 0.0])
    def test_dimension_rank_and_constraints(self, bc, t):
        mesh = uniform_mesh(5)
        dm = build_dof_map(mesh, bc, t)
        assert dm.dim == 4 * mesh.n
        assert dm.R.shape == (4 * (mesh.n + 1), 4 * mesh.n)
        assert np.linalg.matrix_rank(dm.R.toarray()) == 4 * mesh.n

        rng = np.random.default_rng(1)
        for _ in range(5):
            q = TraceVector(dm, rng.standard_normal(dm.dim))
            np.testing.assert_allclose(_constrained_values(q.nodal, bc, t), 0.0, atol=1e-15)

    def test_supported_supported_is_a_selection(self):
        n = 3
        dm = build_dof_map(uniform_mesh(n), "ss", 0.7)
        removed = set(range(4 * (n + 1))) - set(dm.free.tolist())
        assert removed == {0, 2, 4 * n, 4 * n + 2}
        assert dm.R.nnz == 4 * n
        np.testing.assert_array_equal(dm.R.data, 1.0)

    def test_clamped_free_at_zero_thickness(self):
        n = 3
        dm = build_dof_map(uniform_mesh(n), "cf", 0.0)
        removed = set(range(4 * (n + 1))) - set(dm.free.tolist())
        assert removed == {0, 1, 4 * n + 2, 4 * n + 3}
        assert dm.R.nnz == 4 * n

    def test_clamped_coupling_column(self):
        dm = build_dof_map(uniform_mesh(2), "cc", 1.0)
        col = dm.free.tolist().index(DM)
        column = dm.R[:, col].toarray().ravel()
        assert set(np.flatnonzero(column)) == {DU, DM}
        np.testing.assert_array_equal(column[[DU, DM]], [1.0, 1.0])

    def test_free_rows_are_identity(self):
        dm = build_dof_map(uniform_mesh(4), "cs", 0.5)
        np.testing.assert_array_equal(dm.R[dm.free].toarray(), np.eye(dm.dim))

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            build_dof_map(uniform_mesh(2), "xx", 0.5)
        with pytest.raises(ValueError):
            build_dof_map(uniform_mesh(2), "cf", 1.5)


class TestPairing:
    def _single_element_trace(self) -> np.ndarray:
        nodal = np.zeros(8)
        nodal[4 + U] = 1.0  # u(0)=u'(0)=0, u(1)=1, u'(1)=0, M=0
        return nodal

    def test_hand_evaluation(self):
        mesh = uniform_mesh(1)
        q = self._single_element_trace()
        zero = Polynomial([0.0])
        assert pairing(q, [(zero, Polynomial([0.0, 1.0]))], mesh, 0.4) == pytest.approx(-1.0)
        assert pairing(q, [(zero, Polynomial([1.0]))], mesh, 0.4) == pytest.approx(0.0)

    def test_zero_trace(self):
        mesh = uniform_mesh(2)
        tests = [(Polynomial([1.0, 2.0, 3.0]), Polynomial([0.5, -1.0]))] * 2
        assert pairing(np.zeros(12), tests, mesh, 0.9) == 0.0

    def test_antisymmetry(self):
        mesh = uniform_mesh(3)
        rng = np.random.default_rng(2)
        t = 0.7
        u, M_, z, W = (Polynomial(rng.standard_normal(4)) for _ in range(4))
        lhs = pairing(nodal_trace(mesh, u, u.deriv(), M_, M_.deriv()), [(z, W)] * mesh.n, mesh, t)
        rhs = pairing(nodal_trace(mesh, z, z.deriv(), W, W.deriv()), [(u, M_)] * mesh.n, mesh, t)
        assert lhs == pytest.approx(-rhs, abs=1e-12)

    def test_local_matrix_matches_pairing(self):
        mesh = uniform_mesh(1)
        element = mesh.element(0)
        basis = PolyBasis(4, "test")
        t = 0.6
        P = local_pairing_matrix(element, t, basis)
        nodal = np.random.default_rng(3).standard_normal(8)
        zero = Polynomial([0.0])
        for k in range(basis.size):
            phi = Legendre(np.eye(basis.size)[k], domain=list(element))
            assert nodal @ P[:, k] == pytest.approx(pairing(nodal, [(phi, zero)], mesh, t), abs=1e-12)
            assert nodal @ P[:, basis.size + k] == pytest.approx(pairing(nodal, [(zero, phi)], mesh, t), abs=1e-12)

    def test_conforming_tests_annihilate_admissible_traces(self):
        # (z, W) with z(0) = 0, z'(0) = t^2 W'(0), W(1) = W'(1) = 0
        t = 0.4
        mesh = uniform_mesh(4)
        W = Polynomial([1.0, -2.0, 1.0])
        z = Polynomial([0.0, -2.0 * t * t, 1.0])
        dm = build_dof_map(mesh, "cf", t)
        R = dm.R.toarray()
        for k in range(dm.dim):
            assert pairing(R[:, k], [(z, W)] * mesh.n, mesh, t) == pytest.approx(0.0, abs=1e-13)

    @pytest.mark.parametrize("bc", BOUNDARY_CONDITIONS)
    def test_annihilated_tests_are_conforming(self, bc):
        n, t = 3, 0.5
        mesh = uniform_mesh(n)
        dm = build_dof_map(mesh, bc, t)
        cubic = PolyBasis(3, "test")
        nb = cubic.size

        # pairing of every nodal trace with every broken cubic test function
        P_nodal = np.zeros((dm.nodal_size, 2 * nb * n))
        for j in range(n):
            P_nodal[dm.element_rows(j), 2 * nb * j : 2 * nb * (j + 1)] = local_pairing_matrix(mesh.element(j), t, cubic)
        P = dm.R.toarray().T @ P_nodal

        N = null_space(P)
        assert N.shape[1] == 4 * n

        for v in N.T:
            pieces = []
            for j in range(n):
                element = mesh.element(j)
                ends = np.array(element)
                cz = v[2 * nb * j : 2 * nb * j + nb]
                cw = v[2 * nb * j + nb : 2 * nb * (j + 1)]
                V0 = basis_values(cubic, element, ends, 0)
                V1 = basis_values(cubic, element, ends, 1)
                # rows: left, right end; columns: z, z', W, W'
                pieces.append(np.stack([V0 @ cz, V1 @ cz, V0 @ cw, V1 @ cw], axis=1))
            for j in range(n - 1):
                np.testing.assert_allclose(pieces[j][1], pieces[j + 1][0], atol=1e-9)

            z0, dz0, W0, dW0 = pieces[0][0]
            z1, dz1, W1, dW1 = pieces[-1][1]
            nodal_like = np.zeros(4 * (n + 1))
            nodal_like[:4] = (z0, dz0, W0, dW0)
            nodal_like[-4:] = (z1, dz1, W1, dW1)
            np.testing.assert_allclose(_constrained_values(nodal_like, bc, t), 0.0, atol=1e-9)


def _hermite_norm_sq_reference(h: float, v: np.ndarray) -> np.longdouble:
    # Gauss quadrature of the Hermite interpolant on the reference element [0, 1], in long double
    s, w = (np.asarray(a, dtype=np.longdouble) for a in gauss_legendre(4).mapped((0.0, 1.0)))
    H = np.stack([1 - 3 * s**2 + 2 * s**3, s - 2 * s**2 + s**3, 3 * s**2 - 2 * s**3, -(s**2) + s**3], axis=1)
    H2 = np.stack([-6 + 12 * s, -4 + 6 * s, 6 - 12 * s, -2 + 6 * s], axis=1)
    hl = np.longdouble(h)
    v_l, v_r, dv_l, dv_r = (np.longdouble(x) for x in v)
    c = np.array([v_l, hl * dv_l, v_r, hl * dv_r], dtype=np.longdouble)
    return hl * (w @ (H @ c) ** 2) + (w @ (H2 @ c) ** 2) / hl**3


class TestTraceNorm:
    def test_leading_entries(self):
        h = 0.3
        assert hermite_mass(h)[0, 0] == pytest.approx(156 * h / 420)
        # v = (1, 0, 0, 0): curvature (6 / h^2)(2s - 1) on the reference element
        assert hermite_curvature_sq([h], [1.0, 0.0, 0.0, 0.0])[0] == pytest.approx(12 / h**3)

    @pytest.mark.parametrize("h", [1.0, 0.1, 0.01])
    def test_hand_values(self, h):
        one = np.array([1.0, 1.0, 0.0, 0.0])
        x = np.array([0.0, h, 1.0, 1.0])
        x2 = np.array([0.0, h * h, 0.0, 2 * h])
        assert one @ hermite_mass(h) @ one == pytest.approx(h, rel=1e-12)
        assert x @ hermite_mass(h) @ x == pytest.approx(h**3 / 3, rel=1e-11)
        # linear functions have no curvature, x^2 has curvature 2
        assert hermite_curvature_sq([h], one)[0] == 0.0
        assert hermite_curvature_sq([h], x)[0] == 0.0
        assert hermite_curvature_sq([h], x2)[0] == pytest.approx(4 * h, rel=1e-12)
        assert element_norm_sq([h], x2)[0] == pytest.approx(h**5 / 5 + 4 * h, rel=1e-12)

    @pytest.mark.parametrize("h", [1.0, 0.1, 0.01])
    def test_mass_spd(self, h):
        Mass = hermite_mass(h)
        np.testing.assert_array_equal(Mass, Mass.T)
        assert np.all(np.linalg.eigvalsh(Mass) > 0)

    @pytest.mark.parametrize("h", [1.0, 2.0**-3, 2.0**-7, 0.1, 0.01])
    def test_matches_quadrature_of_hermite_interpolant(self, h):
        rng = np.random.default_rng(4)
        V = rng.standard_normal((100, 4))
        got = element_norm_sq(np.full(100, h), V)
        for value, v in zip(got, V):
            assert value == pytest.approx(float(_hermite_norm_sq_reference(h, v)), rel=1e-12)

    @pytest.mark.parametrize("h", [2.0**-3, 2.0**-7])
    def test_smooth_data(self, h):
        # nodal data of sin: the curvature integral is far below the size of the individual terms
        x = np.array([0.3, 0.3 + h])
        v = np.array([np.sin(x[0]), np.sin(x[1]), np.cos(x[0]), np.cos(x[1])])
        got = element_norm_sq([h], v)[0]
        assert got == pytest.approx(float(_hermite_norm_sq_reference(h, v)), rel=1e-12)

    def test_single_element_constant(self):
        mesh = uniform_mesh(1)
        nodal = np.zeros(8)
        nodal[[U, 4 + U]] = 1.0
        assert trace_norm(nodal, mesh) ** 2 == pytest.approx(1.0)
        assert trace_norm_parts(nodal, mesh) == pytest.approx((1.0, 0.0))

    def test_split_between_u_and_M(self):
        mesh = uniform_mesh(4)
        nodal = nodal_trace(mesh, lambda x: x, lambda x: 1.0, lambda x: 2.0, lambda x: 0.0)
        nu, nm = trace_norm_parts(nodal, mesh)
        assert nu**2 == pytest.approx(1.0 / 3.0)
        assert nm**2 == pytest.approx(4.0)
        assert trace_norm(nodal, mesh) ** 2 == pytest.approx(1.0 / 3.0 + 4.0)

    def test_norm_of_trace_vector(self):
        mesh = uniform_mesh(3)
        dm = build_dof_map(mesh, "cs", 0.2)
        q = TraceVector(dm, np.random.default_rng(5).standard_normal(dm.dim))
        assert trace_norm(q, mesh) == pytest.approx(trace_norm(q.nodal, mesh))
