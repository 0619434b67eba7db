"""Small dense complex solves for the center-manifold vectors."""

import numpy as np

from .errors import SingularMatrix


def solve_complex_4x4(m, rhs, pivot_tol: float = 1e-13) -> np.ndarray:
    """Gaussian elimination with partial pivoting.

    A pivot is rejected when its magnitude falls below ``pivot_tol`` times the
    largest entry of its (original) row, which flags resonant or singular
    operators instead of returning garbage.
    """
    a = np.array(m, dtype=complex)
    b = np.array(rhs, dtype=complex)
    n = b.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("non-finite entries")
    scale = np.max(np.abs(a), axis=1)
    if np.any(scale == 0.0):
        raise SingularMatrix("zero row")

    for k in range(n - 1):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[p, k]) < pivot_tol * scale[p]:
            raise SingularMatrix(f"pivot {abs(a[p, k]):.3g} in column {k}")
        if p != k:
            a[[k, p]] = a[[p, k]]
            b[[k, p]] = b[[p, k]]
            scale[[k, p]] = scale[[p, k]]
        for i in range(k + 1, n):
            if a[i, k] != 0.0:
                lam = a[i, k] / a[k, k]
                a[i, k + 1 :] -= lam * a[k, k + 1 :]
                a[i, k] = 0.0
                b[i] -= lam * b[k]
    if abs(a[n - 1, n - 1]) < pivot_tol * scale[n - 1]:
        raise SingularMatrix(f"pivot {abs(a[n - 1, n - 1]):.3g} in column {n - 1}")

    x = np.zeros(n, dtype=complex)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - a[k, k + 1 :] @ x[k + 1 :]) / a[k, k]
    return x
