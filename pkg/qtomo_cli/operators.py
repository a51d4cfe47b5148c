"""
Ladder, number and spin operators on truncated spaces.

Qubits use index 0 for the ground level |g> and index 1 for |e>, with the
spin-1/2 convention sigma_z = (|e><e| - |g><g|)/2.
"""
from __future__ import annotations

from typing import Sequence, Union

import numpy as np
from scipy import sparse

from .errors import DimensionError

ArrayLike = Union[np.ndarray, sparse.spmatrix]


def destroy(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def create(dim: int) -> np.ndarray:
    return destroy(dim).conj().T


def number(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


SIGMA_PLUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
SIGMA_MINUS = SIGMA_PLUS.conj().T
SIGMA_Z = np.diag([-0.5, 0.5]).astype(complex)
SIGMA_X = 0.5 * (SIGMA_PLUS + SIGMA_MINUS)
SIGMA_Y = (SIGMA_PLUS - SIGMA_MINUS) / 2j

SPIN_OPS = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


def embed(op: ArrayLike, index: int, dims: Sequence[int], as_sparse: bool = False) -> ArrayLike:
    """Places a single-subsystem operator at position `index` of a tensor product."""
    if op.shape != (dims[index], dims[index]):
        raise DimensionError(f"Operator shape {op.shape} does not match subsystem {index} of dims {list(dims)}")
    left = int(np.prod(dims[:index], dtype=int))
    right = int(np.prod(dims[index + 1:], dtype=int))
    if as_sparse:
        out = sparse.kron(sparse.identity(left, format="csr"), sparse.csr_matrix(op), format="csr")
        return sparse.kron(out, sparse.identity(right, format="csr"), format="csr")
    return np.kron(np.kron(np.eye(left), op), np.eye(right))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def expect(op: ArrayLike, state) -> complex:
    """<op> for a PureState, DensityMatrix, amplitude vector or density array."""
    matrix = getattr(state, "matrix", None)
    if matrix is None:
        vec = getattr(state, "amplitudes", state)
        vec = np.asarray(vec)
        if vec.ndim == 1:
            return complex(np.vdot(vec, op @ vec))
        matrix = vec
    return complex(np.asarray(op @ matrix).diagonal().sum())
