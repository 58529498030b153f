import numpy as np
import pytest
import scipy.io
import scipy.sparse as sp

from aettools.exceptions import ConvergenceError, SingularSystemError
from aettools.fem.assembly import assemble_stiffness
from aettools.fem.solvers import (
    ConstrainedFactorization,
    Factorization,
    SparseSystem,
    dirichlet_basis,
    dump_matrix_market,
    mass_factorization,
    mass_matrix,
    solve_constrained,
    zero_sum_basis,
)


def test_zero_sum_basis():
    basis = zero_sum_basis(6, np.array([3, 4, 5]))
    assert basis.shape == (6, 5)
    y = np.arange(1.0, 6.0)
    x = basis @ y
    assert x[3:].sum() == pytest.approx(0.0)
    np.testing.assert_array_equal(x[:5], y)


def test_dirichlet_basis():
    basis, offset = dirichlet_basis(5, np.array([0, 4]), np.array([1.0, 2.0]))
    assert basis.shape == (5, 3)
    x = basis @ np.ones(3) + offset
    np.testing.assert_array_equal(x, [1.0, 1.0, 1.0, 1.0, 2.0])


def _linear_problem(mesh):
    fixed = mesh.dirichlet_nodes
    basis, offset = dirichlet_basis(
        mesh.n_vertices, fixed, mesh.vertices[fixed, 0] + mesh.vertices[fixed, 1]
    )
    return SparseSystem(
        assemble_stiffness(mesh, 1.0), np.zeros(mesh.n_vertices), basis, offset
    )


@pytest.mark.parametrize("method", ["direct", "cg"])
def test_linear_solution_is_reproduced(square_mesh, method):
    x, report = solve_constrained(_linear_problem(square_mesh), tol=1e-12, method=method)
    expected = square_mesh.vertices.sum(axis=1)
    np.testing.assert_allclose(x, expected, atol=1e-8)
    assert report.method == method
    assert report.residual_norm < 1e-10


def test_cg_iteration_cap(square_mesh):
    with pytest.raises(ConvergenceError, match="did not converge"):
        solve_constrained(_linear_problem(square_mesh), method="cg", max_iter=1)


def test_zero_load_returns_offset(square_mesh):
    system = SparseSystem(
        assemble_stiffness(square_mesh, 1.0),
        np.zeros(square_mesh.n_vertices),
        *dirichlet_basis(square_mesh.n_vertices, square_mesh.dirichlet_nodes, 0.0),
    )
    x, report = solve_constrained(system)
    assert report.iterations == 0
    np.testing.assert_array_equal(x, 0.0)


def test_unknown_method(square_mesh):
    with pytest.raises(ValueError, match="Unknown method"):
        solve_constrained(_linear_problem(square_mesh), method="gmres")


def test_system_shape_checks():
    with pytest.raises(SingularSystemError, match="square"):
        SparseSystem(sp.csr_matrix((2, 3)), np.zeros(2))
    with pytest.raises(SingularSystemError, match="Right-hand side"):
        SparseSystem(sp.identity(2, format="csr"), np.zeros(3))


def test_singular_factorization():
    with pytest.raises(SingularSystemError, match="Factorization failed"):
        Factorization(sp.csc_matrix((2, 2)))


def test_constrained_factorization_residual(square_mesh):
    problem = _linear_problem(square_mesh)
    factorization = ConstrainedFactorization(problem.matrix, problem.basis)
    x = factorization.solve(problem.rhs, offset=problem.offset)
    assert factorization.residual(x, problem.rhs, problem.offset) < 1e-12
    np.testing.assert_allclose(x, square_mesh.vertices.sum(axis=1), atol=1e-10)


def test_mass_factorization_is_cached(square_mesh):
    assert mass_factorization(square_mesh) is mass_factorization(square_mesh)
    assert mass_matrix(square_mesh) is mass_matrix(square_mesh)


def test_dump_matrix_market(square_mesh, tmp_path):
    matrix = assemble_stiffness(square_mesh, 1.0)
    path = dump_matrix_market(matrix, tmp_path / "stiffness", comment="unit conductivity")
    assert path.suffix == ".mtx"
    loaded = scipy.io.mmread(str(path))
    assert abs(sp.csr_matrix(loaded) - matrix).max() < 1e-14
