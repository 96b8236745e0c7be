from __future__ import annotations

import numpy as np

from ._backend import kernels


class NonHermitianInput(ValueError):
    pass


HERMITIAN_ATOL = 1e-14


def check_hermitian(m, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonHermitianInput(f"expected a square matrix, got shape {m.shape}")
    if m.size and np.max(np.abs(m - m.conj().T)) > atol:
        raise NonHermitianInput("matrix is not Hermitian within tolerance")
    return m


def hermitian_eigenvalues(m, check: bool = True) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix.

    Householder reduction to a real symmetric tridiagonal matrix, then
    implicit-shift QL.
    """
    if check:
        m = check_hermitian(m)
    m = np.asarray(m, dtype=complex)
    if m.shape[0] == 0:
        return np.empty(0)
    return kernels.hermitian_eigenvalues(m)
