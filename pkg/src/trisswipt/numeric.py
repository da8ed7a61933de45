"""Small complex linear-algebra and RNG kernel shared by the solvers."""
from __future__ import annotations

import hashlib

import numpy as np
from scipy.linalg import lapack

__all__ = [
    "NotPositiveDefiniteError",
    "HermitianFactor",
    "herm_solve",
    "quad_form",
    "is_hermitian",
    "make_rng",
    "sample_cn01",
]


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Raised when a Cholesky factorization hits a non-positive pivot."""

    def __init__(self, pivot: int):
        self.pivot = pivot
        super().__init__(
            f"matrix is not positive definite: leading minor of order {pivot} "
            f"(pivot index {pivot - 1}) is not positive"
        )


class HermitianFactor:
    """Cholesky factor of a Hermitian positive-definite matrix.

    The factor is computed once and reused for any number of right-hand
    sides, which is how the ADMM f-update amortizes its cost.

    Parameters
    ----------
    A : ndarray, shape (n, n)
        Hermitian positive-definite matrix. Only the lower triangle is read.
    """

    def __init__(self, A: np.ndarray):
        A = np.asarray(A, dtype=np.complex128)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {A.shape}")
        c, info = lapack.zpotrf(A, lower=1, clean=1)
        if info > 0:
            raise NotPositiveDefiniteError(int(info))
        if info < 0:
            raise ValueError(f"zpotrf: illegal value in argument {-info}")
        self._c = c
        self.n = A.shape[0]

    def solve(self, b: np.ndarray) -> np.ndarray:
        """Solve ``A x = b`` for a vector or for the columns of a matrix."""
        b = np.asarray(b, dtype=np.complex128)
        if b.shape[0] != self.n:
            raise ValueError(f"dimension mismatch: A is {self.n}x{self.n}, b has {b.shape[0]} rows")
        x, info = lapack.zpotrs(self._c, b, lower=1)
        if info != 0:
            raise ValueError(f"zpotrs failed with info={info}")
        return x


def herm_solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a Hermitian positive-definite system without forming an inverse."""
    return HermitianFactor(A).solve(b)


def quad_form(M: np.ndarray, x: np.ndarray) -> float:
    """Real part of ``x^H M x`` (exact for Hermitian ``M`` up to rounding)."""
    return float(np.real(np.vdot(x, M @ x)))


def is_hermitian(M: np.ndarray, tol: float = 1e-12) -> bool:
    M = np.asarray(M)
    return M.ndim == 2 and M.shape[0] == M.shape[1] and bool(np.all(np.abs(M - M.conj().T) <= tol))


def _label_key(label: str) -> int:
    return int.from_bytes(hashlib.sha256(label.encode()).digest()[:8], "little")


def make_rng(seed: int, label: str = "") -> np.random.Generator:
    """Counter-based generator for the stream ``(seed, label)``.

    Streams with different labels are statistically independent, so channel
    draws never shift when another consumer of randomness is added.
    """
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=(_label_key(label),))
    return np.random.Generator(np.random.Philox(ss))


def sample_cn01(rng: np.random.Generator, n: int) -> np.ndarray:
    """Draw ``n`` i.i.d. CN(0, 1) samples (real/imag parts each N(0, 1/2))."""
    if n < 0:
        raise ValueError("n must be non-negative")
    z = rng.standard_normal((2, n))
    return (z[0] + 1j * z[1]) * np.sqrt(0.5)
