import numpy as np
import pytest
import scipy.sparse as sp

from reusemor.core.errors import GmresBreakdown, GmresNotConverged
from reusemor.linalg.gmres import gmres_right_preconditioned
from reusemor.models.solver import GmresConfig
from tests.conftest import random_nonsingular


def test_diagonal_system_with_exact_preconditioner_converges_in_one_step():
    A = sp.diags([1.0, 2.0, 4.0]).tocsr()
    P = sp.diags([1.0, 0.5, 0.25]).tocsr()
    x, rep = gmres_right_preconditioned(A, P, np.array([1.0, 2.0, 4.0]))
    np.testing.assert_allclose(x, np.ones(3), atol=1e-12)
    assert rep.converged and rep.iterations == 1


def test_zero_rhs_returns_zero():
    x, rep = gmres_right_preconditioned(sp.identity(4, format="csr"), None, np.zeros(4))
    assert np.all(x == 0) and rep.converged and rep.iterations == 0


@pytest.mark.parametrize("n", [5, 12, 30])
def test_matches_direct_solve(rng, n):
    A = random_nonsingular(rng, n)
    b = rng.standard_normal(n)
    x, rep = gmres_right_preconditioned(A, None, b, GmresConfig(rel_tol=1e-12))
    np.testing.assert_allclose(x, np.linalg.solve(A, b), rtol=1e-9, atol=1e-10)
    assert rep.true_relative_residual <= 1e-12


def test_residual_history_is_nonincreasing(rng):
    A = random_nonsingular(rng, 20)
    _, rep = gmres_right_preconditioned(A, None, rng.standard_normal(20), GmresConfig(rel_tol=1e-10))
    hist = np.array(rep.residual_history)
    assert np.all(np.diff(hist) <= 1e-12 * hist[0])
    assert rep.relative_residual <= 1e-10


def test_preconditioner_is_used_through_application_only(rng):
    n = 15
    A = random_nonsingular(rng, n)
    Ainv = np.linalg.inv(A)
    calls = []

    def apply_P(v):
        calls.append(1)
        return Ainv @ v

    x, rep = gmres_right_preconditioned(A, apply_P, np.ones(n), GmresConfig(rel_tol=1e-10))
    assert rep.iterations <= 2
    assert calls
    np.testing.assert_allclose(A @ x, np.ones(n), atol=1e-9)


def test_not_converged_carries_partial_result():
    # 1-D Laplacian converges slowly without preconditioning
    n = 200
    A = sp.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1]).tocsr()
    with pytest.raises(GmresNotConverged) as info:
        gmres_right_preconditioned(A, None, np.ones(n), GmresConfig(rel_tol=1e-12, max_iter=5))
    assert info.value.report.iterations == 5
    assert not info.value.report.converged
    assert info.value.x.shape == (n,)


def test_singular_operator_breaks_down():
    with pytest.raises(GmresBreakdown):
        gmres_right_preconditioned(sp.csr_matrix((3, 3)), None, np.ones(3))


def test_invalid_config():
    from reusemor.core.errors import ConfigError

    with pytest.raises(ConfigError):
        GmresConfig(rel_tol=0.0)
