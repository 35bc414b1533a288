"""Dense complex linear algebra used by every other module.

Matrices are plain square ``numpy`` arrays of dtype ``complex128``.  Tensor
products follow the usual row-major Kronecker convention, so for a product
space with factor dimensions ``(d0, d1, ...)`` the first factor is the most
significant index.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionMismatch, NotHermitian, NotUnitary

HERMITIAN_RTOL = 1e-10
UNITARY_TOL = 1e-10


class Eigensystem(NamedTuple):
    """Ascending eigenvalues and the unitary whose columns are eigenvectors."""

    eigenvalues: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.eigenvalues) @ self.vectors.conj().T


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def kron(*factors) -> np.ndarray:
    """Kronecker product of one or more square matrices, left factor most significant."""
    out = as_matrix(factors[0])
    for f in factors[1:]:
        out = np.kron(out, as_matrix(f))
    return out


def hermiticity_defect(h: np.ndarray) -> float:
    return float(np.linalg.norm(h - dagger(h)))


def check_hermitian(h, name: str = "matrix") -> np.ndarray:
    """Validate Hermiticity to ``1e-10 * dim`` and return the symmetrized matrix."""
    h = as_matrix(h)
    defect = hermiticity_defect(h)
    if defect >= HERMITIAN_RTOL * h.shape[0]:
        raise NotHermitian(f"{name} is not Hermitian (||h - h^dag||_F = {defect:.3e})")
    return 0.5 * (h + dagger(h))


def unitarity_defect(u: np.ndarray) -> float:
    u = np.asarray(u)
    return float(np.linalg.norm(dagger(u) @ u - np.eye(u.shape[0])))


def check_unitary(u, name: str = "matrix", tol: float = UNITARY_TOL) -> np.ndarray:
    u = as_matrix(u)
    defect = unitarity_defect(u)
    if defect >= tol:
        raise NotUnitary(f"{name} is not unitary (||U^dag U - I||_F = {defect:.3e})")
    return u


def eig_hermitian(h) -> Eigensystem:
    """Eigendecomposition of a Hermitian matrix with ascending eigenvalues.

    Raises ``NotHermitian`` when ``||h - h^dag||_F >= 1e-10 * dim``; below that
    the input is symmetrized before diagonalization.
    """
    hs = check_hermitian(h)
    w, v = np.linalg.eigh(hs)
    return Eigensystem(w, v)


def function_of_hermitian(es: Eigensystem, f) -> np.ndarray:
    """``V f(diag(w)) V^dag`` for a scalar function ``f`` applied to the spectrum."""
    return (es.vectors * f(es.eigenvalues)) @ es.vectors.conj().T


def expm_hermitian(h, c: complex) -> np.ndarray:
    """``exp(c * h)`` for Hermitian ``h`` (matrix or precomputed ``Eigensystem``)."""
    es = h if isinstance(h, Eigensystem) else eig_hermitian(h)
    return function_of_hermitian(es, lambda w: np.exp(c * w))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def partial_trace(m, dims: Sequence[int], keep) -> np.ndarray:
    """Reduced matrix on the factor(s) ``keep`` of a tensor-product operator.

    ``keep`` may be a single index or a sequence of indices into ``dims``;
    kept factors appear in ascending order.
    """
    m = as_matrix(m)
    dims = [int(d) for d in dims]
    if any(d < 1 for d in dims) or int(np.prod(dims)) != m.shape[0]:
        raise DimensionMismatch(f"dims {dims} do not factor a {m.shape[0]}-dim operator")
    keep_idx = sorted({int(keep)} if np.isscalar(keep) else {int(k) for k in keep})
    if any(k < 0 or k >= len(dims) for k in keep_idx):
        raise DimensionMismatch(f"keep={keep} out of range for {len(dims)} factors")
    n = len(dims)
    t = m.reshape(dims + dims)
    # trace out from the highest index so remaining axis numbers stay valid
    for k in reversed(range(n)):
        if k in keep_idx:
            continue
        nleft = t.ndim // 2
        t = np.trace(t, axis1=k, axis2=k + nleft)
    d_keep = int(np.prod([dims[k] for k in keep_idx]))
    return t.reshape(d_keep, d_keep)


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * 0.5 * (a + dagger(a))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with phase correction."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density_matrix(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ dagger(a)
    return rho / np.trace(rho).real
