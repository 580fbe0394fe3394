"""Small dense linear-algebra kernel.

Matrices are plain 2-D ``numpy.ndarray`` objects of floats and vectors are
1-D arrays. Everything here is deterministic and free of global state.
"""

import numpy as np

from .errors import (
    DimensionMismatch,
    NonConvergence,
    NotPositiveDefinite,
    NotSymmetric,
)

_MAX_SWEEPS = 100


def as_mat(values):
    """Coerce ``values`` to a finite 2-D float array."""
    m = np.array(values, dtype=float)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    elif m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2 or m.size == 0:
        raise DimensionMismatch(f"expected a non-empty matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def mat_mul(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def frobenius_norm(m):
    m = np.asarray(m, dtype=float)
    return float(np.sqrt(np.sum(m * m)))


def sym_eig_spectrum(m, tol=1e-12):
    """Eigenvalues of a symmetric matrix in descending order.

    Cyclic Jacobi rotations are swept over the strictly upper triangle until
    the off-diagonal Frobenius mass drops below ``tol`` times the matrix
    Frobenius norm.

    Raises
    ------
    NotSymmetric
        If ``m`` is not square or ``|m - m.T|`` exceeds ``tol`` (relative).
    NonConvergence
        If the residual is still above tolerance after 100 sweeps.
    """
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {a.shape}")
    scale = frobenius_norm(a)
    if scale == 0.0:
        return np.zeros(a.shape[0])
    if np.max(np.abs(a - a.T)) > tol * scale:
        raise NotSymmetric("matrix is not symmetric within tolerance")
    a = 0.5 * (a + a.T)
    n = a.shape[0]
    target = tol * scale
    for _ in range(_MAX_SWEEPS):
        off = frobenius_norm(a - np.diag(np.diag(a)))
        if off <= target:
            return np.sort(np.diag(a))[::-1]
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                elif abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with J the (p, q) Givens rotation
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
    raise NonConvergence(f"Jacobi sweep cap ({_MAX_SWEEPS}) exceeded")


def spectral_norm(m, tol=1e-12):
    """Largest singular value, from the top eigenvalue of ``m.T @ m``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {m.shape}")
    # Gram of the thinner side keeps the eigenproblem small.
    gram = m.T @ m if m.shape[1] <= m.shape[0] else m @ m.T
    top = sym_eig_spectrum(gram, tol=tol)[0]
    return float(np.sqrt(max(top, 0.0)))


def solve_spd(m, rhs, eps=1e-12):
    """Solve ``X @ m = rhs`` for symmetric positive definite ``m``.

    ``m`` may also be a stack of shape ``(k, d, d)`` with ``rhs`` of shape
    ``(k, r, d)``; each system is solved independently. The Cholesky factor is
    rejected when any squared pivot is at most ``eps * trace(m) / d``, which
    keeps the decision invariant to rescaling the data.
    """
    m = np.asarray(m, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    single = m.ndim == 2
    if single:
        m = m[None]
        rhs = rhs[None]
    if m.ndim != 3 or m.shape[-1] != m.shape[-2]:
        raise DimensionMismatch(f"expected square matrices, got shape {m.shape}")
    if rhs.ndim != 3 or rhs.shape[-1] != m.shape[-1] or rhs.shape[0] != m.shape[0]:
        raise DimensionMismatch(f"rhs shape {rhs.shape} incompatible with {m.shape}")
    d = m.shape[-1]
    sym = 0.5 * (m + np.swapaxes(m, -1, -2))
    threshold = eps * np.trace(sym, axis1=-2, axis2=-1) / d
    try:
        chol = np.linalg.cholesky(sym)
    except np.linalg.LinAlgError:
        chol = None
    if chol is not None:
        pivots = np.diagonal(chol, axis1=-2, axis2=-1) ** 2
        bad = np.any(~(pivots > threshold[:, None]), axis=1)
    else:
        bad = np.ones(m.shape[0], dtype=bool)
        for i, mi in enumerate(sym):
            try:
                li = np.linalg.cholesky(mi)
            except np.linalg.LinAlgError:
                continue
            bad[i] = np.any(~(np.diag(li) ** 2 > threshold[i]))
    if np.any(bad):
        index = None if single else int(np.argmax(bad))
        raise NotPositiveDefinite("matrix is not positive definite", index=index)
    # X m = R  <=>  L L^T X^T = R^T
    z = np.linalg.solve(chol, np.swapaxes(rhs, -1, -2))
    x = np.swapaxes(np.linalg.solve(np.swapaxes(chol, -1, -2), z), -1, -2)
    return x[0] if single else x
