"""System definitions and structural condition checkers.

A system is the pair of real matrices ``(A, B)`` in

    d/dt u + A d/dx u + B u = 0,

optionally with a symmetry witness ``S``. The checkers certify, each with
numeric evidence:

* hyperbolicity (``A`` diagonalizable with real spectrum),
* partial dissipativity (zero a semi-simple eigenvalue of ``B``, the rest
  of the spectrum in the open right half-plane),
* reduced hyperbolicity of the convection matrix on the kernel of ``B``,
  with a strict variant requiring simple reduced speeds,
* uniform dissipativity of the Fourier symbol, sampled on a frequency grid
  and certified at both asymptotic ends,
* the reflection symmetry ``AS = -SA``, ``BS = SB``.

Uniform dissipativity cannot be decided for every frequency numerically;
the verdict combines the sampled infimum of ``-Re(lambda) (1+xi^2)/xi^2``
with positivity of the quadratic low-frequency coefficients, the
high-frequency damping rates and the relaxation rates. A "holds" verdict
therefore means: certified on the grid plus asymptotics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ReductionMissing, ShapeError
from .linalg import EigenDecomp, eig, numerical_rank

__all__ = [
    "SystemDef",
    "ConditionResult",
    "ConditionReport",
    "symbol",
    "symbol_stack",
    "default_xi_grid",
    "check_condition_A",
    "check_condition_B",
    "check_condition_C",
    "check_condition_Cprime",
    "check_condition_D",
    "check_condition_S",
    "check_all",
]

_RCOND_MIN = 1e-8  # diagonalizability threshold on the eigenvector matrix
_ZERO_RADIUS = 1e-8  # relative clustering radius at the origin


def _real_matrix(entries, what: str) -> np.ndarray:
    m = np.asarray(entries)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"{what} must be square, got shape {m.shape}")
    if np.iscomplexobj(m):
        if np.max(np.abs(m.imag)) > 0:
            raise ValueError(f"{what} must have real entries")
        m = m.real
    m = np.array(m, dtype=float)
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{what} entries must be finite")
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class SystemDef:
    """A named system ``u_t + A u_x + B u = 0`` with optional symmetry S."""

    name: str
    A: np.ndarray
    B: np.ndarray
    S: np.ndarray | None = None

    def __post_init__(self):
        a = _real_matrix(self.A, "A")
        b = _real_matrix(self.B, "B")
        if a.shape != b.shape:
            raise ShapeError(f"A and B must share a shape, got {a.shape} vs {b.shape}")
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "B", b)
        if self.S is not None:
            s = _real_matrix(self.S, "S")
            if s.shape != a.shape:
                raise ShapeError(f"S must match A, got {s.shape} vs {a.shape}")
            scale = max(1.0, float(np.max(np.abs(s))))
            if float(np.max(np.abs(s - s.T))) > 1e-10 * scale:
                raise ValueError("symmetry witness S must be symmetric")
            object.__setattr__(self, "S", s)

    @property
    def n(self) -> int:
        return self.A.shape[0]


def symbol(sys: SystemDef, xi: float) -> np.ndarray:
    """Fourier symbol E(i xi) = -(B + i xi A) at a single frequency."""
    return -(sys.B + 1j * xi * sys.A)


def symbol_stack(sys: SystemDef, xi: np.ndarray) -> np.ndarray:
    """Fourier symbols at many frequencies, shape (len(xi), n, n)."""
    xi = np.asarray(xi, dtype=float)
    return -(sys.B[np.newaxis] + 1j * xi[:, np.newaxis, np.newaxis] * sys.A[np.newaxis])


def default_xi_grid(num: int = 400, lo: float = 1e-3, hi: float = 1e3) -> np.ndarray:
    """Log-spaced positive frequency grid used by the dissipativity check."""
    return np.logspace(np.log10(lo), np.log10(hi), num)


@dataclass(frozen=True)
class ConditionResult:
    holds: bool
    evidence: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ConditionReport:
    """Verdicts for all structural conditions of one system.

    ``theta_est`` is the sampled dissipativity constant (0 when uniform
    dissipativity fails); ``m`` is the kernel multiplicity of ``B``.
    """

    system: str
    condA: ConditionResult
    condB: ConditionResult
    condC: ConditionResult
    condCprime: ConditionResult
    condD: ConditionResult
    condS: ConditionResult
    theta_est: float
    m: int


def check_condition_A(sys: SystemDef) -> ConditionResult:
    """A diagonalizable with real eigenvalues."""
    ed = eig(sys.A)
    scale = max(1.0, float(np.max(np.abs(ed.values))))
    real_spec = float(np.max(np.abs(ed.values.imag))) <= 1e-10 * scale
    diagonalizable = ed.rcond >= _RCOND_MIN
    return ConditionResult(
        holds=bool(real_spec and diagonalizable),
        evidence={
            "spectrum": ed.values.tolist(),
            "eigenvector_rcond": ed.rcond,
            "real_spectrum": bool(real_spec),
            "diagonalizable": bool(diagonalizable),
        },
    )


def check_condition_B(sys: SystemDef) -> ConditionResult:
    """Zero semi-simple for B, remaining spectrum in Re > 0.

    The algebraic multiplicity comes from eigenvalue clustering at the
    origin and is cross-checked against the kernel dimension from a rank
    test; any disagreement fails the condition.
    """
    ed = eig(sys.B)
    scale = max(1.0, float(np.max(np.abs(ed.values))))
    radius = _ZERO_RADIUS * scale
    near_zero = np.abs(ed.values) <= radius
    m_alg = int(np.count_nonzero(near_zero))
    m_geo = sys.B.shape[0] - numerical_rank(sys.B, 1e-8)
    others = ed.values[~near_zero]
    others_decaying = bool(others.size == 0 or np.min(others.real) > radius)
    semi_simple = m_alg == m_geo
    holds = bool(m_alg >= 1 and semi_simple and others_decaying)
    return ConditionResult(
        holds=holds,
        evidence={
            "spectrum": ed.values.tolist(),
            "m": m_alg,
            "kernel_dim": m_geo,
            "semi_simple": bool(semi_simple),
            "nonzero_spectrum_decaying": others_decaying,
        },
    )


def _restricted_convection(red) -> tuple[np.ndarray, EigenDecomp]:
    """Eigen-data of the convection matrix compressed to ran(P0)."""
    basis = scipy.linalg.orth(np.array(red.P0))
    if basis.shape[1] != red.m:
        raise ReductionMissing(
            f"range of P0 has numerical rank {basis.shape[1]}, expected m={red.m}"
        )
    w = basis.conj().T @ red.C @ basis
    return basis, eig(w)


def check_condition_C(sys: SystemDef, red) -> ConditionResult:
    """Convection matrix diagonalizable with real spectrum on ker(B)."""
    if red is None:
        raise ReductionMissing("check_condition_C needs ChapmanEnskogData")
    _, ed = _restricted_convection(red)
    scale = max(1.0, float(np.max(np.abs(ed.values))))
    real_spec = float(np.max(np.abs(ed.values.imag))) <= 1e-8 * scale
    diagonalizable = ed.rcond >= _RCOND_MIN
    return ConditionResult(
        holds=bool(real_spec and diagonalizable),
        evidence={
            "reduced_spectrum": ed.values.tolist(),
            "eigenvector_rcond": ed.rcond,
            "real_spectrum": bool(real_spec),
            "diagonalizable": bool(diagonalizable),
        },
    )


def check_condition_Cprime(sys: SystemDef, red) -> ConditionResult:
    """Strict variant: the m reduced speeds are pairwise distinct."""
    base = check_condition_C(sys, red)
    _, ed = _restricted_convection(red)
    vals = ed.values
    scale = max(1.0, float(np.max(np.abs(vals))))
    gap_tol = 1e-8 * scale
    min_gap = np.inf
    for i in range(vals.size):
        for j in range(i + 1, vals.size):
            min_gap = min(min_gap, abs(vals[i] - vals[j]))
    distinct = bool(vals.size <= 1 or min_gap > gap_tol)
    evidence = dict(base.evidence)
    evidence.update({"min_speed_gap": None if np.isinf(min_gap) else float(min_gap),
                     "distinct": distinct})
    return ConditionResult(holds=bool(base.holds and distinct), evidence=evidence)


def check_condition_D(
    sys: SystemDef,
    xi_grid: np.ndarray | None = None,
    red=None,
    hf=None,
    fast=None,
    tol: float = 1e-8,
) -> ConditionResult:
    """Uniform dissipativity: Re(lambda(i xi)) <= -theta xi^2/(1+xi^2).

    Samples the ratio ``-Re(lambda) (1+xi^2)/xi^2`` over ``xi_grid``
    (default: 400 log-spaced points in [1e-3, 1e3]) and takes the minimum
    as ``theta_est``. The verdict additionally requires the asymptotic
    certificates: every quadratic branch coefficient has positive real
    part, every high-frequency damping rate has positive real part, and
    every relaxation rate of ``B`` has positive real part. Between grid
    points the bound is heuristic; the evidence records this.
    """
    from . import reduction  # local import: reduction depends on this module

    if xi_grid is None:
        xi_grid = default_xi_grid()
    xi_grid = np.asarray(xi_grid, dtype=float)
    if xi_grid.size == 0 or np.any(xi_grid <= 0):
        raise ValueError("xi_grid must be a nonempty set of positive frequencies")

    lam = np.linalg.eigvals(symbol_stack(sys, xi_grid))
    ratio = -lam.real * ((1.0 + xi_grid**2) / xi_grid**2)[:, np.newaxis]
    grid_min = float(ratio.min())

    try:
        if red is None:
            red = reduction.reduce_low(sys)
        if hf is None:
            hf = reduction.reduce_high(sys)
        if fast is None:
            fast = reduction.fast_groups(sys)
    except Exception as exc:
        raise ReductionMissing(f"asymptotic certificates unavailable: {exc}") from exc

    d_res = [sub.d.real for br in red.branches for sub in br.sub]
    beta_res = [sub.beta.real for br in hf.branches for sub in br.sub]
    e_res = [grp.e.real for grp in fast]
    cert_low = bool(all(v > tol for v in d_res)) if d_res else True
    cert_high = bool(all(v > tol for v in beta_res)) if beta_res else True
    cert_fast = bool(all(v > tol for v in e_res)) if e_res else True

    holds = bool(grid_min > tol and cert_low and cert_high and cert_fast)
    theta_est = grid_min if holds else 0.0
    return ConditionResult(
        holds=holds,
        evidence={
            "theta_est": theta_est,
            "grid_min_ratio": grid_min,
            "grid": {"num": int(xi_grid.size), "lo": float(xi_grid[0]), "hi": float(xi_grid[-1])},
            "re_d_min": min(d_res) if d_res else None,
            "re_beta_min": min(beta_res) if beta_res else None,
            "re_e_min": min(e_res) if e_res else None,
            "certified": "grid + asymptotics (heuristic between grid points)",
        },
    )


def check_condition_S(sys: SystemDef) -> ConditionResult:
    """Symmetry witness: AS = -SA and BS = SB with S symmetric invertible."""
    if sys.S is None:
        return ConditionResult(holds=False, evidence={"reason": "not provided"})
    s = sys.S
    tol = 1e-10
    na = max(1.0, float(np.linalg.norm(sys.A, 2)))
    nb = max(1.0, float(np.linalg.norm(sys.B, 2)))
    ns = max(1.0, float(np.linalg.norm(s, 2)))
    anti = float(np.linalg.norm(sys.A @ s + s @ sys.A, 2))
    comm = float(np.linalg.norm(sys.B @ s - s @ sys.B, 2))
    sv = np.linalg.svd(s, compute_uv=False)
    invertible = bool(sv[-1] > 1e-10 * sv[0])
    holds = bool(anti <= tol * na * ns and comm <= tol * nb * ns and invertible)
    return ConditionResult(
        holds=holds,
        evidence={
            "anticommutator_norm": anti,
            "commutator_norm": comm,
            "invertible": invertible,
        },
    )


def check_all(
    sys: SystemDef, xi_grid: np.ndarray | None = None, tol: float = 1e-8
) -> ConditionReport:
    """Run every checker; downstream checks degrade gracefully when the
    reductions they rely on are unavailable."""
    from . import reduction

    res_a = check_condition_A(sys)
    res_b = check_condition_B(sys)
    m = int(res_b.evidence.get("m", 0))

    red = hf = fast = None
    blocked = None
    if res_a.holds and res_b.holds:
        try:
            red = reduction.reduce_low(sys)
            hf = reduction.reduce_high(sys)
            fast = reduction.fast_groups(sys)
        except Exception as exc:
            blocked = str(exc)
    else:
        blocked = "conditions A/B do not both hold"

    if red is not None:
        res_c = check_condition_C(sys, red)
        res_cp = check_condition_Cprime(sys, red)
    else:
        ev = {"reason": f"reduction unavailable: {blocked}"}
        res_c = ConditionResult(holds=False, evidence=ev)
        res_cp = ConditionResult(holds=False, evidence=ev)

    if red is not None and hf is not None:
        try:
            res_d = check_condition_D(sys, xi_grid, red=red, hf=hf, fast=fast, tol=tol)
        except ReductionMissing as exc:
            res_d = ConditionResult(holds=False, evidence={"reason": str(exc)})
    else:
        res_d = ConditionResult(
            holds=False, evidence={"reason": f"reduction unavailable: {blocked}"}
        )

    res_s = check_condition_S(sys)
    theta = float(res_d.evidence.get("theta_est", 0.0)) if res_d.holds else 0.0
    return ConditionReport(
        system=sys.name,
        condA=res_a,
        condB=res_b,
        condC=res_c,
        condCprime=res_cp,
        condD=res_d,
        condS=res_s,
        theta_est=theta,
        m=m,
    )
