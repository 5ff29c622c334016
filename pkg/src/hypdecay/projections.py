"""Eigenprojections and reduced resolvents for isolated eigenvalue clusters.

Two independent routes to the same objects:

* :func:`proj_semisimple_zero` evaluates the closed adjugate-derivative
  formulas for the projection onto a semi-simple zero eigenvalue and the
  reduced resolvent there.  The combinatorial column-substitution sums that
  define the bracket powers are never formed; their values are read off the
  coefficients of adj(A + xI) and det(A + xI), which is an identical but
  polynomial-cost evaluation.
* :func:`proj_oracle` builds the spectral projector of any isolated
  eigenvalue cluster from a sorted Schur decomposition.  This is the
  cross-validation oracle for the formula route and also covers defective
  clusters, where an eigenvector-basis construction would be numerically
  meaningless.

Both return a :class:`ProjectorPair` ``(P, S, m)`` satisfying ``P^2 = P``,
``PS = SP = 0``, ``AP = PA`` and, for a semi-simple zero, ``AS = SA = I - P``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ClusterAmbiguous, PostconditionFailure, ZeroDenominator
from .linalg import as_matrix, poly_adjugate

__all__ = [
    "ProjectorPair",
    "bracket_power",
    "bracket_trace",
    "proj_semisimple_zero",
    "proj_oracle",
    "spectral_pair",
]


@dataclass(frozen=True)
class ProjectorPair:
    """Eigenprojection ``P``, reduced resolvent ``S`` and cluster size ``m``."""

    P: np.ndarray
    S: np.ndarray
    m: int


def bracket_power(a: np.ndarray, h: int) -> np.ndarray:
    """h-th bracket power of ``a``: the x^h coefficient of adj(a + xI)."""
    adj, _ = poly_adjugate(a)
    return adj.coeff(h)


def bracket_trace(a: np.ndarray, h: int) -> complex:
    """Trace of the h-th bracket power, via (h+1) times the x^(h+1)
    determinant coefficient."""
    a = as_matrix(a)
    _, det_coeffs = poly_adjugate(a)
    n = a.shape[0]
    if h + 1 > n:
        return 0.0 + 0.0j
    return (h + 1) * complex(det_coeffs[h + 1])


def proj_semisimple_zero(a: np.ndarray, m: int, tol: float | None = None) -> ProjectorPair:
    """Projection and reduced resolvent for a semi-simple zero eigenvalue.

    ``m`` is the algebraic multiplicity of the eigenvalue 0 of ``a``
    (caller-asserted). With ``k = m - 1`` the closed formulas are

        P = (k+1) [a]^k / Tr([a]^k)
        S = ((k+1)(k+2) [a]^(k+1) Tr [a]^k - (k+1)^2 [a]^k Tr [a]^(k+1))
            / ((k+2) (Tr [a]^k)^2)

    with bracket powers read off adj(a + xI).

    Raises :class:`ZeroDenominator` when Tr([a]^k) is numerically zero
    (wrong multiplicity, or zero not semi-simple) and
    :class:`PostconditionFailure` when the result is not idempotent.
    """
    a = as_matrix(a)
    n = a.shape[0]
    if not 1 <= m <= n:
        raise ValueError(f"multiplicity m={m} out of range for n={n}")
    adj, det_coeffs = poly_adjugate(a)
    k = m - 1

    def tr(h: int) -> complex:
        return (h + 1) * complex(det_coeffs[h + 1]) if h + 1 <= n else 0.0 + 0.0j

    trk = tr(k)
    norm = float(np.linalg.norm(a, 2)) if n else 0.0
    # Tr [a]^k is an elementary symmetric function of the nonzero spectrum;
    # scale the zero test accordingly.
    scale = math.comb(n, m) * max(1.0, norm) ** (n - m)
    if abs(trk) <= 1e-10 * scale:
        raise ZeroDenominator(
            f"Tr [A]^{k} = {trk:.3e} is numerically zero; "
            "multiplicity wrong or eigenvalue 0 not semi-simple"
        )
    p = (k + 1) * adj.coeff(k) / trk
    trk1 = tr(k + 1)
    s_num = (k + 1) * (k + 2) * adj.coeff(k + 1) * trk - (k + 1) ** 2 * adj.coeff(k) * trk1
    s = s_num / ((k + 2) * trk * trk)

    ptol = tol if tol is not None else 1e-7 * max(1.0, float(np.linalg.norm(p, 2))) ** 2
    if float(np.linalg.norm(p @ p - p, 2)) > ptol:
        raise PostconditionFailure(
            "computed projection is not idempotent; eigenvalue 0 of the "
            "input is probably not semi-simple with the stated multiplicity"
        )
    return ProjectorPair(P=p, S=s, m=m)


def _schur_cluster(a: np.ndarray, eigenvalue: complex, radius: float):
    """Sorted complex Schur form with the target cluster leading.

    Returns ``(T, Z, sdim, eigs)`` where the first ``sdim`` diagonal
    entries of ``T`` lie within ``radius`` of ``eigenvalue``.
    """
    t, z, sdim = scipy.linalg.schur(
        np.array(a, dtype=complex),
        output="complex",
        sort=lambda lam: abs(lam - eigenvalue) <= radius,
    )
    return t, z, sdim, np.diag(t)


def spectral_pair(a: np.ndarray, eigenvalue: complex, radius: float) -> ProjectorPair:
    """Cluster projector and reduced resolvent without separation guards.

    Low-level entry point: every eigenvalue within ``radius`` of
    ``eigenvalue`` joins the cluster; the caller is responsible for
    choosing a radius that isolates it. :func:`proj_oracle` is the guarded
    public variant.
    """
    a = as_matrix(a)
    n = a.shape[0]
    t, z, sdim, _ = _schur_cluster(a, eigenvalue, radius)
    if sdim == 0:
        raise ClusterAmbiguous(f"no eigenvalue within {radius:.3e} of {eigenvalue}")
    if sdim == n:
        return ProjectorPair(P=np.eye(n, dtype=complex), S=np.zeros((n, n), dtype=complex), m=n)
    t11 = t[:sdim, :sdim]
    t12 = t[:sdim, sdim:]
    t22 = t[sdim:, sdim:]
    # complementary invariant subspace: columns of [Y; I] with T11 Y - Y T22 = -T12
    y = scipy.linalg.solve_sylvester(t11, -t22, -t12)
    p_t = np.zeros((n, n), dtype=complex)
    p_t[:sdim, :sdim] = np.eye(sdim)
    p_t[:sdim, sdim:] = -y
    m22 = np.linalg.inv(t22 - eigenvalue * np.eye(n - sdim))
    s_t = np.zeros((n, n), dtype=complex)
    s_t[:sdim, sdim:] = y @ m22
    s_t[sdim:, sdim:] = m22
    zh = z.conj().T
    return ProjectorPair(P=z @ p_t @ zh, S=z @ s_t @ zh, m=int(sdim))


def proj_oracle(a: np.ndarray, eigenvalue: complex, tol: float | None = None) -> ProjectorPair:
    """Spectral projector and reduced resolvent of an eigenvalue cluster.

    All eigenvalues of ``a`` within ``tol`` of ``eigenvalue`` form the
    cluster (default ``tol``: 1e-8 times the matrix scale). The projector
    is assembled from a sorted Schur decomposition: with the cluster
    rotated to the leading block, the complementary invariant subspace is
    decoupled by a Sylvester solve. This reproduces the spectral sum
    P = sum_cluster v_i w_i^T for diagonalizable input and stays
    well-defined for defective clusters. ``S`` inverts ``a - eigenvalue I``
    on the complementary subspace and kills the cluster subspace.

    Raises :class:`ClusterAmbiguous` when no eigenvalue lies within
    ``tol`` of the target or when the gap separating the cluster from the
    rest of the spectrum is below ``10 * tol``.
    """
    a = as_matrix(a)
    n = a.shape[0]
    if tol is None:
        tol = 1e-8 * max(1.0, float(np.linalg.norm(a, 2)))
    eigs = np.linalg.eigvals(np.array(a))
    dists = np.abs(eigs - eigenvalue)
    inside = dists <= tol
    if not np.any(inside):
        raise ClusterAmbiguous(
            f"no eigenvalue within {tol:.3e} of target {eigenvalue}; "
            f"closest is at distance {dists.min():.3e}"
        )
    if not np.all(inside):
        max_in = float(np.max(dists[inside]))
        min_out = float(np.min(dists[~inside]))
        if min_out - max_in < 10 * tol:
            raise ClusterAmbiguous(
                f"cluster radius {max_in:.3e} and exterior distance "
                f"{min_out:.3e} are separated by less than 10*tol"
            )
    return spectral_pair(a, eigenvalue, tol)
