import logging

import numpy as np

from ..channel import DensityMatrix2, DensityMatrix4

logger = logging.getLogger(__name__)

_SIGMA_Y = np.array([[0.0, -1j], [1j, 0.0]])
_SPIN_FLIP = np.kron(_SIGMA_Y, _SIGMA_Y)


def trace_distances(rho_a: np.ndarray, rho_b: np.ndarray) -> np.ndarray:
    """
    Trace distance of stacked hermitian matrices, shape `(..., n, n)` -> `(...)`.
    """
    rho_a = np.asarray(rho_a)
    rho_b = np.asarray(rho_b)
    if rho_a.shape != rho_b.shape:
        raise ValueError(f"Expect matrices of the same shape, got {rho_a.shape} and {rho_b.shape}")
    return 0.5 * np.sum(np.abs(np.linalg.eigvalsh(rho_a - rho_b)), axis=-1)


def trace_distance(rho_a: DensityMatrix4 | DensityMatrix2, rho_b: DensityMatrix4 | DensityMatrix2) -> float:
    """
    D = 1/2 tr|rho_a - rho_b|, half the sum of absolute eigenvalues of the difference.
    """
    if type(rho_a) is not type(rho_b):
        raise ValueError(f"Expect states of the same dimension, got {type(rho_a).__name__} "
                         f"and {type(rho_b).__name__}")
    return float(trace_distances(rho_a.matrix, rho_b.matrix))


def concurrences(matrices: np.ndarray) -> np.ndarray:
    """
    Wootters concurrence of stacked two-qubit density matrices, shape `(..., 4, 4)` -> `(...)`.

    With rho = V V^H the spin-flipped eigenvalues are the singular values of V^T (sigma_y x sigma_y) V,
    which avoids the square root of a matrix with round-off negative eigenvalues.
    """
    weights, vectors = np.linalg.eigh(np.asarray(matrices))
    factors = vectors * np.sqrt(np.clip(weights, 0.0, None))[..., None, :]
    tau = np.swapaxes(factors, -1, -2) @ _SPIN_FLIP @ factors
    singular = np.linalg.svd(tau, compute_uv=False)
    return np.maximum(0.0, singular[..., 0] - singular[..., 1] - singular[..., 2] - singular[..., 3])


def concurrence(rho: DensityMatrix4) -> float:
    if not isinstance(rho, DensityMatrix4):
        raise TypeError(f"expect DensityMatrix4, got {type(rho).__name__}")
    return float(concurrences(rho.matrix))
