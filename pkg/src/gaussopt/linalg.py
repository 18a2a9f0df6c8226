"""Small dense matrix-function helpers built on numpy/scipy."""

import numpy as np
import scipy.linalg as sla


def sym(a):
    return 0.5 * (a + a.T)


def antisym(a):
    return 0.5 * (a - a.T)


def sym_funm(a, f):
    """f(a) for a symmetric (or Hermitian) matrix via eigh."""
    w, v = np.linalg.eigh(a)
    return (v * f(w)) @ v.conj().T


def diag_funm(a, f):
    """f(a) for a diagonalizable matrix via its eigendecomposition."""
    w, v = np.linalg.eig(a)
    return (v * f(w)) @ np.linalg.inv(v)


def expm(a):
    return sla.expm(a)


def max_abs(a):
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def null_space(a, rtol=1e-10):
    """Orthonormal basis (columns) of the kernel of a."""
    if a.size == 0:
        return np.eye(a.shape[1])
    u, s, vh = np.linalg.svd(a)
    scale = s[0] if s.size else 1.0
    rank = int(np.sum(s > rtol * max(scale, 1.0)))
    return vh[rank:].conj().T


def range_space(a, rtol=1e-10):
    """Orthonormal basis (columns) of the column space of a."""
    if a.size == 0:
        return np.zeros((a.shape[0], 0))
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    scale = s[0] if s.size else 1.0
    rank = int(np.sum(s > rtol * max(scale, 1.0)))
    return u[:, :rank]
