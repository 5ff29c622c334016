"""Dense complex matrix core.

Matrices are plain ``numpy.ndarray`` objects with dtype ``complex128``;
:func:`as_matrix` is the validating constructor (finite entries only, returns
a read-only copy so validated matrices can be shared freely across threads).
On top of the array type this module provides the pieces the spectral
machinery is built from: a deterministic-order eigendecomposition, the matrix
exponential, matrix-valued polynomials in a scalar, the adjugate/determinant
of ``M + x I`` as such polynomials, and a singular-value rank count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NonSquare, NumericalFailure

__all__ = [
    "as_matrix",
    "default_tol",
    "EigenDecomp",
    "eig",
    "expm",
    "PolyMatrix",
    "poly_adjugate",
    "numerical_rank",
]


def as_matrix(entries, square: bool = True) -> np.ndarray:
    """Validate and freeze a complex matrix.

    Accepts anything ``np.asarray`` does. Rejects NaN/Inf entries and,
    unless ``square=False``, non-square shapes. The returned array is a
    read-only ``complex128`` copy.
    """
    m = np.array(entries, dtype=complex)
    if m.ndim != 2:
        raise NonSquare(f"expected a 2-d matrix, got ndim={m.ndim}")
    if square and m.shape[0] != m.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite (no NaN/Inf)")
    m.setflags(write=False)
    return m


def default_tol(m: np.ndarray) -> float:
    """Scale-invariant default tolerance: 1e-10 * max(1, ||M||_inf)."""
    m = np.asarray(m)
    scale = float(np.max(np.abs(m))) if m.size else 0.0
    return 1e-10 * max(1.0, scale)


@dataclass(frozen=True)
class EigenDecomp:
    """Eigendecomposition with deterministically ordered eigenvalues.

    ``values[i]`` pairs with column ``vectors[:, i]``. ``rcond`` is the
    reciprocal 2-norm condition number of the eigenvector matrix (0 for a
    numerically defective decomposition); ``residual`` is the relative
    reconstruction error ||A - V diag(w) V^-1|| / ||A|| when the inverse
    exists.
    """

    values: np.ndarray
    vectors: np.ndarray
    rcond: float
    residual: float

    @property
    def n(self) -> int:
        return self.values.shape[0]


def _eig_order(w: np.ndarray) -> np.ndarray:
    # sort by real part, then imaginary part, ties by magnitude
    return np.lexsort((np.abs(w), w.imag, w.real))


def eig(m: np.ndarray) -> EigenDecomp:
    """Eigendecomposition of a square matrix with fixed eigenvalue order.

    Eigenvalues are sorted by real part, then imaginary part, then
    magnitude, so downstream branch indices are reproducible. Eigenvector
    columns are normalised to unit 2-norm with their largest-magnitude
    entry rotated onto the positive real axis.
    """
    m = as_matrix(m)
    try:
        w, v = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails
        raise NumericalFailure(f"eigendecomposition did not converge: {exc}") from exc
    order = _eig_order(w)
    w = w[order]
    v = v[:, order]
    # deterministic phase/sign: largest entry of each column real positive
    idx = np.argmax(np.abs(v), axis=0)
    pivots = v[idx, np.arange(v.shape[1])]
    phases = np.where(np.abs(pivots) > 0, pivots / np.abs(pivots), 1.0)
    v = v / phases[np.newaxis, :]
    sv = np.linalg.svd(v, compute_uv=False)
    rcond = float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0
    if rcond > 1e-14:
        recon = v @ np.diag(w) @ np.linalg.inv(v)
        scale = max(1.0, float(np.linalg.norm(m)))
        residual = float(np.linalg.norm(recon - m)) / scale
    else:
        residual = np.inf
    return EigenDecomp(values=w, vectors=v, rcond=rcond, residual=residual)


def expm(m: np.ndarray) -> np.ndarray:
    """Matrix exponential (scaling-and-squaring, via scipy)."""
    m = as_matrix(m)
    return scipy.linalg.expm(np.array(m))


@dataclass(frozen=True)
class PolyMatrix:
    """Matrix-valued polynomial ``sum_k coeffs[k] x^k``.

    ``coeffs`` has shape ``(degree+1, n, n)``; the leading coefficient may
    be zero (the stored degree is an upper bound).
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 3 or c.shape[1] != c.shape[2]:
            raise NonSquare("PolyMatrix coefficients must have shape (d+1, n, n)")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    def coeff(self, k: int) -> np.ndarray:
        """k-th coefficient matrix; zero matrix beyond the stored degree."""
        if k < 0:
            raise IndexError("negative polynomial degree")
        if k > self.degree:
            return np.zeros((self.dim, self.dim), dtype=complex)
        return self.coeffs[k]

    def __call__(self, x: complex) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for k in range(self.degree, -1, -1):
            out = out * x + self.coeffs[k]
        return out


def poly_adjugate(m: np.ndarray) -> tuple[PolyMatrix, np.ndarray]:
    """adj(M + xI) and det(M + xI) as polynomials in the scalar x.

    Returns ``(adj, det_coeffs)`` where ``adj`` is a degree-(n-1)
    :class:`PolyMatrix` and ``det_coeffs[k]`` is the x^k coefficient of
    det(M + xI) (length n+1, leading coefficient 1). Computed by the
    Faddeev-LeVerrier recursion, exact up to floating rounding for small
    integer-entried matrices; the defining identity
    ``(M + xI) adj(M + xI) = det(M + xI) I`` holds at every x.
    """
    m = as_matrix(m)
    n = m.shape[0]
    b = -np.array(m)  # det(M + xI) = det(xI - (-M)), adj likewise
    det_coeffs = np.zeros(n + 1, dtype=complex)
    det_coeffs[n] = 1.0
    eye = np.eye(n, dtype=complex)
    adj_coeffs = np.zeros((n, n, n), dtype=complex)
    mk = np.zeros((n, n), dtype=complex)
    for k in range(1, n + 1):
        mk = b @ mk + det_coeffs[n - k + 1] * eye
        det_coeffs[n - k] = -np.trace(b @ mk) / k
        # adj(xI - b) = sum_k x^k M_{n-k}
        adj_coeffs[n - k] = mk
    return PolyMatrix(coeffs=adj_coeffs), det_coeffs


def numerical_rank(m: np.ndarray, tol: float) -> int:
    """Count of singular values above ``tol * sigma_max`` (0 for M = 0)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = as_matrix(np.asarray(m), square=False)
    sv = np.linalg.svd(m, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.count_nonzero(sv > tol * sv[0]))
