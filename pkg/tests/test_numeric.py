import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trisswipt.numeric import (HermitianFactor, NotPositiveDefiniteError, herm_solve, is_hermitian,
                               make_rng, quad_form, sample_cn01)


def random_pd(rng, n, shift=0.5):
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return X @ X.conj().T + shift * np.eye(n)


def test_identity_solve():
    x = herm_solve(np.eye(2), np.array([1 + 1j, 2]))
    np.testing.assert_allclose(x, [1 + 1j, 2], atol=1e-15)


def test_diagonal_solve():
    np.testing.assert_allclose(herm_solve(np.diag([2.0, 4.0]), np.array([2.0, 4.0])), [1, 1])


def test_random_pd_residual():
    rng = np.random.default_rng(3)
    A = random_pd(rng, 8)
    b = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    x = herm_solve(A, b)
    assert np.linalg.norm(A @ x - b) <= 1e-10 * np.linalg.norm(b)


def test_factor_reused_for_matrix_rhs():
    rng = np.random.default_rng(4)
    A = random_pd(rng, 5)
    B = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
    X = HermitianFactor(A).solve(B)
    np.testing.assert_allclose(A @ X, B, atol=1e-10)


def test_not_pd_reports_pivot():
    A = np.diag([1.0, 2.0, -1.0, 3.0])
    with pytest.raises(NotPositiveDefiniteError) as exc:
        herm_solve(A, np.ones(4))
    assert exc.value.pivot == 3
    assert "3" in str(exc.value)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        HermitianFactor(np.eye(3)).solve(np.ones(2))
    with pytest.raises(ValueError):
        HermitianFactor(np.ones((2, 3)))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_left_inverse_property(n, seed):
    rng = np.random.default_rng(seed)
    A = random_pd(rng, n)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    y = herm_solve(A, A @ x)
    assert np.linalg.norm(y - x) <= 1e-9 * max(1.0, np.linalg.norm(x)) * np.linalg.cond(A) / 10


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_hermitian_quadratic_form_is_real(n, seed):
    rng = np.random.default_rng(seed)
    M = random_pd(rng, n, shift=0.0) - random_pd(rng, n, shift=0.0)
    assert is_hermitian(M, 1e-12)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    full = np.vdot(x, M @ x)
    assert abs(full.imag) <= 1e-12 * np.linalg.norm(x) ** 2 * max(1.0, np.abs(M).max())
    assert quad_form(M, x) == pytest.approx(full.real)


def test_sampling_is_deterministic():
    a = sample_cn01(make_rng(11, "x"), 4)
    b = sample_cn01(make_rng(11, "x"), 4)
    np.testing.assert_array_equal(a, b)


def test_streams_differ_by_label_and_seed():
    a = sample_cn01(make_rng(11, "x"), 4)
    assert not np.allclose(a, sample_cn01(make_rng(11, "y"), 4))
    assert not np.allclose(a, sample_cn01(make_rng(12, "x"), 4))


def test_sampling_moments():
    z = sample_cn01(make_rng(0, "moments"), 100_000)
    assert abs(z.mean()) <= 0.02
    assert 0.98 <= np.mean(np.abs(z) ** 2) <= 1.02
    # real and imaginary parts each carry half the power
    assert np.var(z.real) == pytest.approx(0.5, abs=0.01)
    assert np.var(z.imag) == pytest.approx(0.5, abs=0.01)


def test_sampling_empty():
    z = sample_cn01(make_rng(0), 0)
    assert z.shape == (0,)
    with pytest.raises(ValueError):
        sample_cn01(make_rng(0), -1)


def test_frozen_stream_values():
    # guards the (seed, label) -> stream contract against silent changes
    z = sample_cn01(make_rng(2024, "frozen"), 2)
    expected = [0.6703521391110189 - 0.2264100468852093j, 1.270840252956322 + 0.5465361535073556j]
    np.testing.assert_allclose(z, expected, rtol=0, atol=1e-14)
