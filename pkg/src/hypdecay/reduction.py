"""Spectral reductions of the symbol E(i xi) = -(B + i xi A).

Three regimes, each reduced to finite matrix data:

* low frequency, kernel group: the Chapman-Enskog cascade produces the
  zero-eigenprojection ``P0`` of ``B`` and its reduced resolvent ``S0``,
  the first-order projection coefficient ``P01``, the convection matrix
  ``C`` and the diffusion matrix ``D``, then splits the kernel into
  branches per reduced speed ``c_j`` and further per diffusion coefficient
  ``d_jl``, with the nilpotent parts ``N_jl``;
* low frequency, relaxed group: one :class:`FastDecayGroup` per distinct
  nonzero eigenvalue ``e_j`` of ``B`` with its projection and nilpotent
  part;
* high frequency: in the eigenbasis ``Q`` of ``A``, branches per distinct
  speed ``alpha_j`` with 0/1 diagonal projections, split further by the
  damping rates ``beta_jl`` of the compressed relaxation matrix.

Branch speeds with a simple reduced eigenvalue additionally carry the
first-order projection coefficient ``Pj1`` used by the refined diffusion
profile. The product formula for ``Pj1`` is evaluated with the diffusion
matrix corrected by ``-alpha * P01``: the spectral shift that separates
the kernel speeds from the ambient zero moves with the perturbed
projection, so the shifted family is ``C' - zeta (D - alpha P01) + ...``
rather than ``C' - zeta D + ...``. Without the correction the computed
coefficient would depend on the arbitrary shift and, for the damped-wave
system, would vanish instead of reproducing the first-order term of the
true branch projection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import (
    BranchExtractionFailure,
    ClusterAmbiguous,
    ConditionViolation,
    PostconditionFailure,
    ZeroDenominator,
)
from .linalg import eig
from .projections import proj_semisimple_zero, spectral_pair
from .structure import (
    SystemDef,
    check_condition_A,
    check_condition_B,
    symbol_stack,
)

__all__ = [
    "DiffusionSub",
    "DiffusionBranch",
    "ChapmanEnskogData",
    "FastDecayGroup",
    "HighFreqSub",
    "HighFreqBranch",
    "HighFreqData",
    "EigencurveSample",
    "ExpansionOrderReport",
    "reduce_low",
    "fast_groups",
    "reduce_high",
    "sample_eigencurves",
    "expansion_order_check",
]


@dataclass(frozen=True)
class DiffusionSub:
    """One diffusion coefficient d_jl with its projection and nilpotent part."""

    d: complex
    Pjl0: np.ndarray
    Njl0: np.ndarray


@dataclass(frozen=True)
class DiffusionBranch:
    """Kernel branch travelling at speed c with diffusive sub-splitting."""

    c: float
    Pj0: np.ndarray
    Sj0: np.ndarray
    sub: tuple[DiffusionSub, ...]
    Pj1: np.ndarray | None = None

    @property
    def simple(self) -> bool:
        return self.Pj1 is not None


@dataclass(frozen=True)
class ChapmanEnskogData:
    """Low-frequency reduction data of one system."""

    P0: np.ndarray
    S0: np.ndarray
    P01: np.ndarray
    C: np.ndarray
    D: np.ndarray
    alpha_shift: float
    Cprime: np.ndarray
    branches: tuple[DiffusionBranch, ...]
    m: int

    @property
    def h(self) -> int:
        """Number of distinct reduced speeds."""
        return len(self.branches)


@dataclass(frozen=True)
class FastDecayGroup:
    """Relaxation group at a nonzero eigenvalue e of B."""

    e: complex
    Fj0: np.ndarray
    Mj0: np.ndarray
    k_index: int


@dataclass(frozen=True)
class HighFreqSub:
    beta: complex
    Pijl0: np.ndarray
    Thetajl0: np.ndarray


@dataclass(frozen=True)
class HighFreqBranch:
    """High-frequency branch at transport speed alpha."""

    alpha: float
    Pij0: np.ndarray
    indices: tuple[int, ...]
    sub: tuple[HighFreqSub, ...]


@dataclass(frozen=True)
class HighFreqData:
    """High-frequency reduction data in the eigenbasis of A."""

    Q: np.ndarray
    Qinv: np.ndarray
    Abar: np.ndarray
    Bbar: np.ndarray
    branches: tuple[HighFreqBranch, ...]

    @property
    def s(self) -> int:
        return len(self.branches)


@dataclass(frozen=True)
class EigencurveSample:
    """Branch-matched eigenvalues of the symbol at one frequency.

    ``close_pairs`` lists index pairs closer than the coalescence
    threshold, flagging candidate exceptional points.
    """

    xi: float
    eigenvalues: np.ndarray
    close_pairs: tuple[tuple[int, int], ...] = ()


def _cluster_means(values: np.ndarray, radius: float) -> list[tuple[complex, np.ndarray]]:
    """Group values within ``radius`` of a running mean; deterministic order."""
    order = np.lexsort((np.abs(values), values.imag, values.real))
    groups: list[list[int]] = []
    for idx in order:
        v = values[idx]
        placed = False
        for grp in groups:
            mean = np.mean(values[grp])
            if abs(v - mean) <= radius:
                grp.append(idx)
                placed = True
                break
        if not placed:
            groups.append([idx])
    return [(complex(np.mean(values[g])), np.asarray(g)) for g in groups]


def _isolation_radius(target: complex, values: np.ndarray, members: np.ndarray) -> float:
    """Midpoint radius separating a cluster from the rest of a spectrum."""
    dists = np.abs(values - target)
    max_in = float(np.max(dists[members]))
    outside = np.delete(dists, members)
    if outside.size == 0:
        return max(2.0 * max_in, 1.0)
    min_out = float(np.min(outside))
    if min_out <= max_in:
        raise ClusterAmbiguous(
            f"cluster at {target} cannot be isolated: spread {max_in:.3e} "
            f"exceeds exterior distance {min_out:.3e}"
        )
    return 0.5 * (max_in + min_out)


def _split_on_range(mat: np.ndarray, proj: np.ndarray, rank: int, radius: float):
    """Eigen-split of ``mat`` restricted to the (invariant) range of ``proj``.

    Returns a list of ``(value, P_full, N_full)`` triples: the clustered
    eigenvalue, its full-space projection (acting as the spectral
    projector on ran(proj) and as zero on its kernel) and the nilpotent
    part. The restriction is diagonalized on an orthonormal basis of the
    range so the ambient zero eigenvalues never intrude.
    """
    basis = scipy.linalg.orth(np.array(proj))
    if basis.shape[1] != rank:
        raise BranchExtractionFailure(
            f"projector range has numerical rank {basis.shape[1]}, expected {rank}"
        )
    w = basis.conj().T @ mat @ basis
    vals = np.linalg.eigvals(w)
    out = []
    for value, members in _cluster_means(vals, radius):
        iso = _isolation_radius(value, vals, members)
        pair = spectral_pair(w, value, iso)
        if pair.m != members.size:
            raise BranchExtractionFailure(
                f"cluster at {value} captured {pair.m} eigenvalues, expected {members.size}"
            )
        p_full = basis @ pair.P @ basis.conj().T @ proj
        n_full = (mat - value * np.eye(mat.shape[0])) @ p_full
        out.append((value, p_full, n_full))
    return out


def reduce_low(sys: SystemDef) -> ChapmanEnskogData:
    """Chapman-Enskog reduction of the kernel group.

    Computes ``P0, S0`` from the closed adjugate formulas, then

        P01 = -P0 A S0 - S0 A P0
        C   = P0 A P0
        D   = -(P01 B P01 + P0 A P01 + P01 A P0)

    shifts the convection matrix by ``alpha = 1 + max |sigma(C)|`` to
    separate the kernel speeds from the ambient zero, and extracts one
    :class:`DiffusionBranch` per distinct reduced speed, each split per
    diffusion coefficient with nilpotent parts. Speeds with a simple
    reduced eigenvalue carry the first-order projection coefficient
    ``Pj1`` (see the module docstring for the shift correction).
    """
    res_a = check_condition_A(sys)
    if not res_a.holds:
        raise ConditionViolation("A", "flux matrix not diagonalizable with real spectrum")
    res_b = check_condition_B(sys)
    if not res_b.holds:
        raise ConditionViolation("B", "zero not a semi-simple eigenvalue with decaying complement")
    m = int(res_b.evidence["m"])
    n = sys.n

    pair0 = proj_semisimple_zero(sys.B, m)
    p0, s0 = pair0.P, pair0.S
    a = sys.A.astype(complex)
    b = sys.B.astype(complex)
    p01 = -p0 @ a @ s0 - s0 @ a @ p0
    c = p0 @ a @ p0
    d = -(p01 @ b @ p01 + p0 @ a @ p01 + p01 @ a @ p0)

    alpha = 1.0 + float(np.max(np.abs(np.linalg.eigvals(c))))
    cprime = c + alpha * p0

    basis0 = scipy.linalg.orth(np.array(p0))
    if basis0.shape[1] != m:
        raise BranchExtractionFailure(
            f"range of P0 has numerical rank {basis0.shape[1]}, expected m={m}"
        )
    kernel_speeds = np.linalg.eigvals(basis0.conj().T @ c @ basis0)
    speed_scale = max(1.0, float(np.max(np.abs(kernel_speeds))) + alpha)
    radius = 1e-8 * speed_scale

    branches = []
    d_scale = max(1.0, float(np.linalg.norm(d, 2)))
    dm = d - alpha * p01  # shift correction for the first-order coefficient
    for c_j, members in _cluster_means(kernel_speeds, radius):
        if abs(c_j.imag) > radius:
            raise BranchExtractionFailure(
                f"reduced speed {c_j} is not real; condition C fails upstream"
            )
        m_j = members.size
        x = cprime - (c_j + alpha) * np.eye(n)
        try:
            pair_j = proj_semisimple_zero(x, m_j)
        except (ZeroDenominator, PostconditionFailure) as exc:
            raise BranchExtractionFailure(
                f"branch at speed {c_j.real:.6g}: {exc}"
            ) from exc
        pj0, sj0 = pair_j.P, pair_j.S
        dj = pj0 @ d @ pj0
        # wide radius: defective clusters scatter like sqrt(eps) numerically
        subs = tuple(
            DiffusionSub(d=val, Pjl0=p_full, Njl0=n_full)
            for val, p_full, n_full in _split_on_range(dj, pj0, m_j, 1e-6 * d_scale)
        )
        pj1 = pj0 @ dm @ sj0 + sj0 @ dm @ pj0 if m_j == 1 else None
        branches.append(
            DiffusionBranch(c=float(c_j.real), Pj0=pj0, Sj0=sj0, sub=subs, Pj1=pj1)
        )
    branches.sort(key=lambda br: br.c)
    return ChapmanEnskogData(
        P0=p0,
        S0=s0,
        P01=p01,
        C=c,
        D=d,
        alpha_shift=alpha,
        Cprime=cprime,
        branches=tuple(branches),
        m=m,
    )


def fast_groups(sys: SystemDef) -> list[FastDecayGroup]:
    """One relaxation group per distinct nonzero eigenvalue of B."""
    res_b = check_condition_B(sys)
    if not res_b.holds:
        raise ConditionViolation("B", "zero not a semi-simple eigenvalue with decaying complement")
    b = sys.B.astype(complex)
    vals = np.linalg.eigvals(b)
    scale = max(1.0, float(np.max(np.abs(vals))))
    radius = 1e-8 * scale
    groups = []
    k = 0
    for value, members in _cluster_means(vals, radius):
        if abs(value) <= radius:
            continue
        iso = _isolation_radius(value, vals, members)
        pair = spectral_pair(b, value, iso)
        if pair.m != members.size:
            raise ClusterAmbiguous(
                f"group at {value} captured {pair.m} eigenvalues, expected {members.size}"
            )
        f = pair.P
        mjl = (b - value * np.eye(sys.n)) @ f
        groups.append(FastDecayGroup(e=value, Fj0=f, Mj0=mjl, k_index=k))
        k += 1
    return groups


def reduce_high(sys: SystemDef) -> HighFreqData:
    """High-frequency reduction in the eigenbasis of A.

    ``Q`` holds the eigenvectors of ``A`` in the deterministic eigenvalue
    order; ``Abar`` is forced exactly diagonal after a residual check and
    its equal entries define the index partition, so every ``Pij0`` is an
    exact 0/1 diagonal matrix summing to the identity.
    """
    res_a = check_condition_A(sys)
    if not res_a.holds:
        raise ConditionViolation("A", "flux matrix not diagonalizable with real spectrum")
    n = sys.n
    ed = eig(sys.A)
    q = np.array(ed.vectors)
    scale = max(1.0, float(np.max(np.abs(sys.A))))
    if float(np.max(np.abs(q.imag))) <= 1e-12 * scale:
        q = q.real.astype(complex)
    qinv = np.linalg.inv(q)
    abar_raw = qinv @ sys.A @ q
    off = abar_raw - np.diag(np.diag(abar_raw))
    if float(np.max(np.abs(off))) > 1e-8 * scale:
        raise ConditionViolation("A", "diagonalization residual too large")
    diag = np.diag(abar_raw).real

    clusters = _cluster_means(diag.astype(complex), 1e-8 * scale)
    clusters.sort(key=lambda item: item[0].real)
    alphas = np.array(diag, dtype=float)
    for value, members in clusters:
        alphas[members] = value.real
    abar = np.diag(alphas).astype(complex)
    bbar = qinv @ sys.B @ q

    b_scale = max(1.0, float(np.linalg.norm(bbar, 2)))
    branches = []
    for value, members in clusters:
        idx = np.sort(members)
        pij0 = np.zeros((n, n), dtype=complex)
        pij0[idx, idx] = 1.0
        bj = pij0 @ bbar @ pij0
        wb = bbar[np.ix_(idx, idx)]
        vals = np.linalg.eigvals(wb)
        subs = []
        for beta, sub_members in _cluster_means(vals, 1e-6 * b_scale):
            iso = _isolation_radius(beta, vals, sub_members)
            pair = spectral_pair(wb, beta, iso)
            if pair.m != sub_members.size:
                raise BranchExtractionFailure(
                    f"high-frequency cluster at {beta} captured {pair.m} "
                    f"eigenvalues, expected {sub_members.size}"
                )
            pijl0 = np.zeros((n, n), dtype=complex)
            pijl0[np.ix_(idx, idx)] = pair.P
            theta = (bj - beta * np.eye(n)) @ pijl0
            subs.append(HighFreqSub(beta=beta, Pijl0=pijl0, Thetajl0=theta))
        branches.append(
            HighFreqBranch(
                alpha=float(value.real),
                Pij0=pij0,
                indices=tuple(int(i) for i in idx),
                sub=tuple(subs),
            )
        )
    return HighFreqData(Q=q, Qinv=qinv, Abar=abar, Bbar=bbar, branches=tuple(branches))


_COALESCENCE_DIST = 1e-6


def _match_to(prev: np.ndarray, cur: np.ndarray) -> np.ndarray:
    """Order ``cur`` to continue the branches of ``prev``.

    Greedy nearest-neighbour matching; falls back to an optimal assignment
    whenever a greedy choice is ambiguous (second-nearest candidate within
    a factor 2) or conflicting.
    """
    n = prev.size
    dist = np.abs(prev[:, np.newaxis] - cur[np.newaxis, :])
    ambiguous = False
    taken = np.zeros(n, dtype=bool)
    perm = np.full(n, -1)
    for i in np.argsort(dist.min(axis=1)):
        row = dist[i]
        order = np.argsort(row)
        best = order[0]
        if n > 1 and row[order[1]] < 2.0 * row[best]:
            ambiguous = True
            break
        if taken[best]:
            ambiguous = True
            break
        perm[i] = best
        taken[best] = True
    if ambiguous:
        _, cols = scipy.optimize.linear_sum_assignment(dist)
        perm = cols
    return cur[perm]


def sample_eigencurves(sys: SystemDef, xi_values) -> list[EigencurveSample]:
    """Branch-tracked eigenvalue curves of the symbol over a frequency list.

    The first sample is put in the deterministic eigenvalue order; each
    later sample is permuted to minimise the pairing distance to its
    predecessor. Near-coalescent pairs are flagged per sample.
    """
    xi_values = np.asarray(xi_values, dtype=float)
    if xi_values.size and np.any(np.diff(xi_values) < 0):
        raise ValueError("xi_values must be sorted ascending")
    lam = np.linalg.eigvals(symbol_stack(sys, xi_values))
    samples: list[EigencurveSample] = []
    prev: np.ndarray | None = None
    for k in range(xi_values.size):
        cur = lam[k]
        if prev is None:
            order = np.lexsort((np.abs(cur), cur.imag, cur.real))
            matched = cur[order]
        else:
            matched = _match_to(prev, cur)
        flags = []
        for i in range(matched.size):
            for j in range(i + 1, matched.size):
                if abs(matched[i] - matched[j]) < _COALESCENCE_DIST:
                    flags.append((i, j))
        samples.append(
            EigencurveSample(
                xi=float(xi_values[k]), eigenvalues=matched, close_pairs=tuple(flags)
            )
        )
        prev = matched
    return samples


@dataclass(frozen=True)
class ExpansionSlope:
    """Fitted residual slope of one branch against its model curve."""

    branch: tuple[int, int]
    value: complex
    slope: float | None
    at_noise_floor: bool


@dataclass(frozen=True)
class ExpansionOrderReport:
    low: tuple[ExpansionSlope, ...]
    high: tuple[ExpansionSlope, ...]
    symmetric_gain: bool


def _residual_slopes(sys, pred_fns, xi):
    lam = np.linalg.eigvals(symbol_stack(sys, xi))
    norm_e = float(np.linalg.norm(sys.B, 2) + xi[-1] * np.linalg.norm(sys.A, 2))
    floor = 1e-13 * max(1.0, norm_e)
    rows = []
    for branch, value, fn in pred_fns:
        pred = fn(xi)
        res = np.min(np.abs(lam - pred[:, np.newaxis]), axis=1)
        if np.median(res) < floor:
            rows.append(ExpansionSlope(branch=branch, value=value, slope=None, at_noise_floor=True))
            continue
        res = np.maximum(res, 1e-300)
        slope = float(np.polyfit(np.log(xi), np.log(res), 1)[0])
        rows.append(ExpansionSlope(branch=branch, value=value, slope=slope, at_noise_floor=False))
    return rows


def expansion_order_check(
    sys: SystemDef,
    red: ChapmanEnskogData,
    hf: HighFreqData,
    low_window: tuple[float, float] = (1e-3, 1e-1),
    high_window: tuple[float, float] = (1e2, 1e4),
    num: int = 20,
) -> ExpansionOrderReport:
    """Measure the order of the eigenvalue expansions against the symbol.

    For every kernel branch the residual ``|lambda(i xi) + i c xi + d xi^2|``
    is fitted on a log-log grid over ``low_window``; a slope near 4 is the
    signature of the even dispersion relation (symmetry present), near 3
    of the generic cubic term. For every high-frequency branch the
    residual ``|mu(i xi) + i alpha xi + beta|`` is fitted over
    ``high_window``, with expected slope -1. ``symmetric_gain`` is true
    when every kernel slope is at least 3.5. Residuals at the eigenvalue
    noise floor are flagged instead of fitted.
    """
    xi_low = np.logspace(np.log10(low_window[0]), np.log10(low_window[1]), num)
    low_preds = []
    for j, br in enumerate(red.branches):
        for l, sub in enumerate(br.sub):
            low_preds.append(
                (
                    (j, l),
                    sub.d,
                    lambda x, c=br.c, d=sub.d: -1j * c * x - d * x**2,
                )
            )
    low_rows = _residual_slopes(sys, low_preds, xi_low)

    xi_high = np.logspace(np.log10(high_window[0]), np.log10(high_window[1]), num)
    high_preds = []
    for j, br in enumerate(hf.branches):
        for l, sub in enumerate(br.sub):
            high_preds.append(
                (
                    (j, l),
                    sub.beta,
                    lambda x, a=br.alpha, b=sub.beta: -1j * a * x - b,
                )
            )
    high_rows = _residual_slopes(sys, high_preds, xi_high)

    fitted = [row.slope for row in low_rows if row.slope is not None]
    gain = bool(fitted) and all(s >= 3.5 for s in fitted)
    return ExpansionOrderReport(low=tuple(low_rows), high=tuple(high_rows), symmetric_gain=gain)
