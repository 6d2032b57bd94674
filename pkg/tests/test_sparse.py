import numpy as np
import pytest
import scipy.sparse as sp

from reusemor.core.errors import DimensionMismatch, SpaiError
from reusemor.linalg.sparse import (
    as_csr,
    extract_column_submatrix,
    frobenius_distance,
    frobenius_norm,
    identity_distance,
    matvec,
    matvec_transpose,
)


def test_as_csr_sums_duplicates_and_sorts():
    A = sp.coo_matrix(([2.0, 3.0, 1.0], ([0, 0, 1], [1, 1, 0])), shape=(2, 2))
    C = as_csr(A)
    assert C.has_canonical_format
    assert C[0, 1] == 5.0
    assert C.dtype == np.float64


def test_as_csr_reads_vectors_as_columns():
    assert as_csr(np.array([1.0, 2.0, 3.0])).shape == (3, 1)


def test_matvec_matches_dense(rng):
    A = sp.random(7, 5, density=0.4, random_state=rng, format="csr")
    x = rng.standard_normal(5)
    y = rng.standard_normal(7)
    np.testing.assert_allclose(matvec(A, x), A.toarray() @ x, atol=1e-14)
    np.testing.assert_allclose(matvec_transpose(A, y), A.toarray().T @ y, atol=1e-14)


def test_matvec_rejects_wrong_length():
    with pytest.raises(DimensionMismatch):
        matvec(sp.identity(3, format="csr"), np.ones(4))


def test_identity_distance_of_identity_is_zero():
    assert identity_distance(sp.identity(5, format="csr")) == 0.0
    assert identity_distance(2.0 * sp.identity(4, format="csr")) == pytest.approx(1.0)


def test_frobenius_distance_shape_check():
    with pytest.raises(DimensionMismatch):
        frobenius_distance(sp.identity(2), sp.identity(3))


def test_extract_column_submatrix():
    A = np.array([[1.0, 0.0, 2.0], [0.0, 0.0, 3.0], [4.0, 0.0, 0.0], [0.0, 0.0, 5.0]])
    block, rows = extract_column_submatrix(sp.csr_matrix(A), [0, 2])
    np.testing.assert_array_equal(rows, [0, 1, 2, 3])
    np.testing.assert_array_equal(block, A[:, [0, 2]])

    block, rows = extract_column_submatrix(sp.csr_matrix(A), [1])
    assert block.shape == (0, 1)
    assert rows.size == 0


def test_extract_column_submatrix_errors():
    A = sp.identity(3, format="csr")
    with pytest.raises(SpaiError):
        extract_column_submatrix(A, [])
    with pytest.raises(DimensionMismatch):
        extract_column_submatrix(A, [3])


@pytest.mark.parametrize(
    "A, expected",
    [
        (sp.identity(2, format="csr"), np.sqrt(2.0)),
        (sp.csr_matrix((3, 3)), 0.0),
        (sp.csr_matrix(np.array([[1.0, 2.0], [3.0, 4.0]])), np.sqrt(30.0)),
    ],
)
def test_frobenius_norm(A, expected):
    assert frobenius_norm(A) == pytest.approx(expected, abs=1e-15)


def test_frobenius_norm_is_sum_of_row_norms(rng):
    A = sp.random(9, 7, density=0.4, random_state=rng, format="csr")
    rows = sum(np.linalg.norm(matvec_transpose(A, e)) ** 2 for e in np.eye(9))
    assert frobenius_norm(A) ** 2 == pytest.approx(rows, rel=1e-12)
