"""Fourier-space kernels and physical-space wave profiles.

The solution of the system and its asymptotic profiles are all Fourier
multipliers applied to the initial datum:

* ``Ghat``: the exact propagator ``exp(E(i xi) t)``;
* ``Khat``: the diffusion-wave kernel, one term per kernel branch and
  diffusion coefficient, with exact truncated series for the nilpotent
  exponentials;
* ``Khat_star``: the refined diffusion kernel carrying the first-order
  initial-data correction (requires simple reduced speeds);
* ``Vhat``: the exponentially decaying wave kernel built from the
  high-frequency branch data.

Each kernel accepts a scalar frequency or a vector of frequencies; the
vector form returns a stacked ``(K, n, n)`` array and is what the solver
uses. Physical-space solutions live on a periodic grid: sample the datum,
FFT, multiply by the kernel at the grid frequencies, inverse FFT. The
profile kernels are the exact Fourier solutions of their Cauchy problems,
so the only discretisation errors are the periodic wrap-around (guarded by
a domain-size precondition) and the truncation of the datum's tails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainTooSmall, MissingPj1
from .linalg import expm
from .reduction import ChapmanEnskogData, HighFreqData, reduce_high, reduce_low
from .structure import SystemDef, symbol, symbol_stack

__all__ = [
    "GridSpec",
    "InitialData",
    "GridSolution",
    "Ghat",
    "Khat",
    "Khat_star",
    "Vhat",
    "FrequencyPropagator",
    "ProfileSolver",
    "solve",
]


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on [-L, L) with N points (power of two)."""

    L: float
    N: int

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError("L must be positive")
        if self.N < 16 or self.N & (self.N - 1):
            raise ValueError("N must be a power of two, at least 16")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def x(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.N)

    @property
    def xi(self) -> np.ndarray:
        """Grid frequencies pi*k/L in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.N, d=self.dx)


@dataclass(frozen=True)
class InitialData:
    """Vector-valued initial datum: a scalar shape times an amplitude.

    ``gaussian``: amplitude * exp(-((x-center)/sigma)^2); ``box``:
    amplitude on [center-halfwidth, center+halfwidth]; ``custom``: raw
    samples, shape (N, n), tied to a specific grid.
    """

    kind: str
    amplitude: np.ndarray
    sigma: float = 1.0
    halfwidth: float = 1.0
    center: float = 0.0
    samples: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def gaussian(cls, amplitude, sigma: float = 1.0, center: float = 0.0) -> "InitialData":
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        return cls(kind="gaussian", amplitude=np.atleast_1d(np.asarray(amplitude, dtype=complex)),
                   sigma=sigma, center=center)

    @classmethod
    def box(cls, amplitude, halfwidth: float = 1.0, center: float = 0.0) -> "InitialData":
        if halfwidth <= 0:
            raise ValueError("halfwidth must be positive")
        return cls(kind="box", amplitude=np.atleast_1d(np.asarray(amplitude, dtype=complex)),
                   halfwidth=halfwidth, center=center)

    @classmethod
    def custom(cls, samples) -> "InitialData":
        samples = np.asarray(samples, dtype=complex)
        if samples.ndim != 2:
            raise ValueError("custom samples must have shape (N, n)")
        return cls(kind="custom", amplitude=np.ones(samples.shape[1], dtype=complex),
                   samples=samples)

    def sample(self, grid: GridSpec, n: int) -> np.ndarray:
        """Datum sampled on the grid, shape (N, n)."""
        if self.kind == "custom":
            if self.samples.shape != (grid.N, n):
                raise ValueError(
                    f"custom samples shape {self.samples.shape} does not match "
                    f"grid/system ({grid.N}, {n})"
                )
            return np.array(self.samples)
        if self.amplitude.shape != (n,):
            raise ValueError(f"amplitude must have length n={n}")
        x = grid.x
        if self.kind == "gaussian":
            shape = np.exp(-(((x - self.center) / self.sigma) ** 2))
        elif self.kind == "box":
            shape = (np.abs(x - self.center) <= self.halfwidth).astype(float)
        else:
            raise ValueError(f"unknown datum kind {self.kind!r}")
        return shape[:, np.newaxis] * self.amplitude[np.newaxis, :]

    def support_radius(self, grid: GridSpec | None = None, n: int | None = None) -> float:
        """Effective support radius around the origin (8 sigma for a gaussian)."""
        if self.kind == "gaussian":
            return abs(self.center) + 8.0 * self.sigma
        if self.kind == "box":
            return abs(self.center) + self.halfwidth
        if grid is None or n is None:
            raise ValueError("custom datum needs the grid to measure support")
        vals = np.abs(self.sample(grid, n)).max(axis=1)
        mask = vals > 1e-12 * max(vals.max(), 1e-300)
        if not np.any(mask):
            return 0.0
        return float(np.max(np.abs(grid.x[mask])))


@dataclass(frozen=True)
class GridSolution:
    """Complex vector field on a grid at a fixed time."""

    grid: GridSpec
    t: float
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 2 or v.shape[0] != self.grid.N:
            raise ValueError(f"values must have shape (N, n), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("solution values must be finite")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[1]


def _as_xi_array(xi) -> tuple[np.ndarray, bool]:
    arr = np.atleast_1d(np.asarray(xi, dtype=float))
    return arr, np.isscalar(xi) or np.ndim(xi) == 0


def _nilpotent_series(x: np.ndarray) -> list[np.ndarray]:
    """Powers x^k/k! until the power degenerates to rounding junk."""
    n = x.shape[0]
    terms = [np.eye(n, dtype=complex)]
    acc = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(x, 2)))
    for k in range(1, n + 1):
        acc = acc @ x / k
        if float(np.linalg.norm(acc, 2)) <= 1e-12 * scale**k / math.factorial(k):
            break
        terms.append(acc)
    return terms


def Ghat(sys: SystemDef, xi, t: float) -> np.ndarray:
    """Exact propagator exp(E(i xi) t) = expm(-(B + i xi A) t).

    Scalar ``xi`` gives one (n, n) matrix; a vector gives a stacked
    (K, n, n) array (computed via a per-frequency eigendecomposition with
    an expm fallback at ill-conditioned frequencies).
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    arr, scalar = _as_xi_array(xi)
    if scalar:
        return expm(symbol(sys, float(arr[0])) * t)
    return FrequencyPropagator(sys, arr).at(t)


class FrequencyPropagator:
    """Evaluates exp(E(i xi) t) on a fixed frequency vector for many times.

    Diagonalises the symbol once per frequency; frequencies where the
    eigenvector matrix is ill-conditioned (near exceptional points) fall
    back to the scaling-and-squaring exponential at each requested time.
    """

    _RCOND_FLOOR = 1e-10

    def __init__(self, sys: SystemDef, xi: np.ndarray):
        self.sys = sys
        self.xi = np.asarray(xi, dtype=float)
        stack = symbol_stack(sys, self.xi)
        w, v = np.linalg.eig(stack)
        sv = np.linalg.svd(v, compute_uv=False)
        rcond = sv[:, -1] / np.maximum(sv[:, 0], 1e-300)
        self._bad = rcond < self._RCOND_FLOOR
        good = ~self._bad
        self._w = w
        self._v = v
        self._vinv = np.zeros_like(v)
        if np.any(good):
            self._vinv[good] = np.linalg.inv(v[good])
        self._stack = stack

    def at(self, t: float) -> np.ndarray:
        if t < 0:
            raise ValueError("t must be nonnegative")
        out = np.einsum("kij,kj,kjl->kil", self._v, np.exp(self._w * t), self._vinv)
        if np.any(self._bad):
            for k in np.nonzero(self._bad)[0]:
                out[k] = expm(self._stack[k] * t)
        return out


def Khat(red: ChapmanEnskogData, xi, t: float) -> np.ndarray:
    """Diffusion-wave kernel: sum over kernel branches of
    exp((-i c xi - d xi^2) t) exp(-N xi^2 t) P."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    arr, scalar = _as_xi_array(xi)
    n = red.P0.shape[0]
    out = np.zeros((arr.size, n, n), dtype=complex)
    for br in red.branches:
        for sub in br.sub:
            phase = np.exp((-1j * br.c * arr - sub.d * arr**2) * t)
            terms = _nilpotent_series(-sub.Njl0)
            s = arr**2 * t
            nil = np.zeros((arr.size, n, n), dtype=complex)
            for k, term in enumerate(terms):
                nil += (s**k)[:, np.newaxis, np.newaxis] * (term @ sub.Pjl0)[np.newaxis]
            out += phase[:, np.newaxis, np.newaxis] * nil
    return out[0] if scalar else out


def Khat_star(red: ChapmanEnskogData, xi, t: float) -> np.ndarray:
    """Refined diffusion kernel exp((-i c xi - d xi^2) t) (Pj0 + i xi Pj1).

    Needs every branch simple (nilpotent parts vanish and the first-order
    coefficient exists); raises :class:`MissingPj1` otherwise.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    arr, scalar = _as_xi_array(xi)
    n = red.P0.shape[0]
    out = np.zeros((arr.size, n, n), dtype=complex)
    for br in red.branches:
        if br.Pj1 is None:
            raise MissingPj1(
                f"branch at speed {br.c:.6g} has multiplicity > 1; "
                "the refined kernel requires strictly hyperbolic reduced speeds"
            )
        d = br.sub[0].d
        phase = np.exp((-1j * br.c * arr - d * arr**2) * t)
        first = br.Pj0[np.newaxis] + (1j * arr)[:, np.newaxis, np.newaxis] * br.Pj1[np.newaxis]
        out += phase[:, np.newaxis, np.newaxis] * first
    return out[0] if scalar else out


def Vhat(hf: HighFreqData, xi, t: float) -> np.ndarray:
    """Exponential-wave kernel Q sum exp((-i alpha xi - beta) t)
    exp(-Theta t) Pi Q^-1."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    arr, scalar = _as_xi_array(xi)
    n = hf.Q.shape[0]
    inner = np.zeros((arr.size, n, n), dtype=complex)
    for br in hf.branches:
        for sub in br.sub:
            phase = np.exp((-1j * br.alpha * arr - sub.beta) * t)
            terms = _nilpotent_series(-sub.Thetajl0)
            mat = np.zeros((n, n), dtype=complex)
            for k, term in enumerate(terms):
                mat += t**k * (term @ sub.Pijl0)
            inner += phase[:, np.newaxis, np.newaxis] * mat[np.newaxis]
    out = np.einsum("ij,kjl,lm->kim", hf.Q, inner, hf.Qinv)
    return out[0] if scalar else out


class ProfileSolver:
    """Evolves a datum on one grid with any of the four kernels.

    Reduction data and the exact propagator are computed lazily and
    cached, so a ladder of times costs one spectral setup plus one FFT
    round trip per evaluation.
    """

    def __init__(self, sys: SystemDef, grid: GridSpec):
        self.sys = sys
        self.grid = grid
        self._red: ChapmanEnskogData | None = None
        self._hf: HighFreqData | None = None
        self._prop: FrequencyPropagator | None = None

    @property
    def red(self) -> ChapmanEnskogData:
        if self._red is None:
            self._red = reduce_low(self.sys)
        return self._red

    @property
    def hf(self) -> HighFreqData:
        if self._hf is None:
            self._hf = reduce_high(self.sys)
        return self._hf

    @property
    def propagator(self) -> FrequencyPropagator:
        if self._prop is None:
            self._prop = FrequencyPropagator(self.sys, self.grid.xi)
        return self._prop

    def _kernel(self, which: str, t: float) -> np.ndarray:
        if which == "exact":
            return self.propagator.at(t)
        if which == "diffusion":
            return Khat(self.red, self.grid.xi, t)
        if which == "diffusion_refined":
            return Khat_star(self.red, self.grid.xi, t)
        if which == "expwave":
            return Vhat(self.hf, self.grid.xi, t)
        raise ValueError(f"unknown profile kind {which!r}")

    def check_domain(self, u0: InitialData, t: float) -> None:
        """Wrap-around guard: L >= support + max|alpha| t + 10 sqrt(d_max t)."""
        support = u0.support_radius(self.grid, self.sys.n)
        needed = support
        if t > 0:
            alpha_max = float(np.max(np.abs(np.linalg.eigvals(self.sys.A))))
            try:
                d_max = max(
                    (max(sub.d.real, 0.0) for br in self.red.branches for sub in br.sub),
                    default=0.0,
                )
            except Exception:
                d_max = 0.0  # exact evolution of a system without a valid reduction
            needed = support + alpha_max * t + 10.0 * math.sqrt(d_max * t)
        if self.grid.L < needed:
            raise DomainTooSmall(
                f"grid half-length {self.grid.L} < {needed:.1f} required at t={t} "
                "(support + transport + diffusive spread)"
            )

    def solve(self, u0: InitialData, t: float, which: str = "exact") -> GridSolution:
        if t < 0:
            raise ValueError("t must be nonnegative")
        self.check_domain(u0, t)
        values = u0.sample(self.grid, self.sys.n)
        if t == 0 and which == "exact":
            return GridSolution(grid=self.grid, t=0.0, values=values)
        u_hat = np.fft.fft(values, axis=0)
        kernel = self._kernel(which, t)
        out_hat = np.einsum("kij,kj->ki", kernel, u_hat)
        out = np.fft.ifft(out_hat, axis=0)
        return GridSolution(grid=self.grid, t=float(t), values=out)


def solve(
    sys: SystemDef,
    grid: GridSpec,
    u0: InitialData,
    t: float,
    which: str = "exact",
) -> GridSolution:
    """One-shot evolution; see :class:`ProfileSolver` for ladders of times."""
    return ProfileSolver(sys, grid).solve(u0, t, which)
