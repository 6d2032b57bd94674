import numpy as np
import pytest

from reusemor.core.errors import ConfigError
from reusemor.mor.generators import disc_brake_parts, generate_bilinear_toy, generate_disc_brake_like, generate_qb_toy


def test_disc_brake_parts():
    parts = disc_brake_parts(25, seed=1)
    masses = parts.M.diagonal()
    assert np.all(masses > 0) and masses.max() / masses.min() > 10.0
    assert abs(parts.K_R + parts.K_R.T).max() == 0.0
    assert abs(parts.K_E - parts.K_E.T).max() == 0.0
    assert np.all(np.linalg.eigvalsh(parts.K_E.toarray()) > 0)


def test_disc_brake_model_is_proportionally_damped():
    sys = generate_disc_brake_like(30, omega=3.0, alpha=0.1, beta=1e-4, seed=2)
    assert sys.n == 30 and sys.m == 1 and sys.q == 1
    assert sys.damping_gap() < 1e-12
    assert sys.F[0, 0] == 1.0 and sys.F.nnz == 1


def test_disc_brake_is_seeded():
    a = generate_disc_brake_like(16, seed=5)
    b = generate_disc_brake_like(16, seed=5)
    c = generate_disc_brake_like(16, seed=6)
    assert (a.K != b.K).nnz == 0
    assert (a.K != c.K).nnz > 0


def test_bilinear_toy():
    sys = generate_bilinear_toy(20, m=2, q=3, seed=1)
    assert len(sys.N) == 2 and sys.C.shape == (20, 3)
    assert np.all(np.linalg.eigvals(sys.K.toarray()).real < 0)
    np.testing.assert_allclose(np.linalg.norm(sys.F.toarray(), axis=0), 1.0)


def test_qb_toy():
    sys = generate_qb_toy(6, seed=3)
    assert sys.H.shape == (6, 36) and sys.H.nnz == 6
    assert np.linalg.norm(sys.c_vector()) == pytest.approx(1.0)


@pytest.mark.parametrize("make", [lambda: generate_disc_brake_like(3), lambda: generate_bilinear_toy(1), lambda: generate_qb_toy(1)])
def test_too_small(make):
    with pytest.raises(ConfigError):
        make()
