"""Multi-interference vectorial phase retrieval.

The unknown phases of the target series and of ``R`` secondary series are
stacked into ``y`` (target block first, then one block of ``N`` per secondary
signal). For a support guess ``s`` the cost

    Q_s(y) = weight * sum_r sum_{k>=s} |DFT(|f_r| y_r)[k]|^2
             + sum_r sum_j |y_0[j] - y_r[j] g_r[j]|^2

is the quadratic form of ``A_s^H A_s``; the relaxed problem is solved by its
smallest eigenvector.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from specfree import dsp, shotnoise
from specfree.simcore import TimeSeries1D

log = logging.getLogger(__name__)

DEFAULT_EPS = 1e-12
FULL_EIGH_LIMIT = 2048
# magnitudes below this fraction of the largest one count as exact zeros
ZERO_MAG_RTOL = 1e-10
DIM_CAP = 8192
LAMBDA_FLOOR_RTOL = 1e-12


@dataclass(eq=False)
class VprDataset:
    """Magnitude measurements: ``abs_f1`` (N,) and ``abs_f2/3/4`` (R, N)."""

    abs_f1: np.ndarray
    abs_f2: np.ndarray
    abs_f3: np.ndarray
    abs_f4: np.ndarray
    dt: float = 1.0

    def __post_init__(self):
        self.abs_f1 = np.asarray(self.abs_f1, dtype=float)
        self.abs_f2, self.abs_f3, self.abs_f4 = (
            np.atleast_2d(np.asarray(a, dtype=float)) for a in (self.abs_f2, self.abs_f3, self.abs_f4)
        )
        n = len(self.abs_f1)
        for a in (self.abs_f2, self.abs_f3, self.abs_f4):
            if a.shape != (self.r_count, n):
                raise ValueError("secondary magnitude arrays must all have shape (R, N)")
        if np.any(self.abs_f1 < 0) or any(np.any(a < 0) for a in (self.abs_f2, self.abs_f3, self.abs_f4)):
            raise ValueError("magnitudes must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.abs_f1)

    @property
    def r_count(self) -> int:
        return self.abs_f2.shape[0]

    @property
    def dim(self) -> int:
        return (self.r_count + 1) * self.n

    @classmethod
    def from_signals(cls, f1: np.ndarray, f2: np.ndarray, dt: float = 1.0) -> "VprDataset":
        """Exact magnitudes from complex target ``f1`` and secondaries ``f2`` (R, N)."""
        f1 = np.asarray(f1, dtype=complex)
        f2 = np.atleast_2d(np.asarray(f2, dtype=complex))
        return cls(np.abs(f1), np.abs(f2), np.abs(f1 + f2), np.abs(f1 + 1j * f2), dt)

    @classmethod
    def sampled(
        cls,
        f1: np.ndarray,
        f2: np.ndarray,
        cfg: shotnoise.ShotConfig,
        dt: float = 1.0,
        scale_f3: np.ndarray | float = 2.0,
        scale_f4: np.ndarray | float = 2.0,
    ) -> "VprDataset":
        """Finite-shot magnitudes of ``f1``, ``f2`` and both interference signals.

        ``scale_f3`` / ``scale_f4`` (scalar or one per secondary) are the squared
        norms of the prepared superpositions; 2 for orthogonal state pairs.
        """
        f1 = np.asarray(f1, dtype=complex)
        f2 = np.atleast_2d(np.asarray(f2, dtype=complex))
        R = f2.shape[0]
        s3 = np.broadcast_to(np.asarray(scale_f3, dtype=float), (R,))
        s4 = np.broadcast_to(np.asarray(scale_f4, dtype=float), (R,))
        a1 = shotnoise.noisy_magnitudes(f1, 1.0, cfg, "f1")
        a2 = np.array([shotnoise.noisy_magnitudes(f2[r], 1.0, cfg, f"f2/{r}") for r in range(R)])
        a3 = np.array([shotnoise.noisy_magnitudes(f1 + f2[r], s3[r], cfg, f"f3/{r}") for r in range(R)])
        a4 = np.array([shotnoise.noisy_magnitudes(f1 + 1j * f2[r], s4[r], cfg, f"f4/{r}") for r in range(R)])
        return cls(a1, a2, a3, a4, dt)

    def subset(self, r_count: int) -> "VprDataset":
        return VprDataset(
            self.abs_f1, self.abs_f2[:r_count], self.abs_f3[:r_count], self.abs_f4[:r_count], self.dt
        )


@dataclass
class Ratios:
    """Unit interference ratios ``g`` (R, N) and the mask of usable entries."""

    g: np.ndarray
    reliable: np.ndarray

    @property
    def dropped(self) -> int:
        return int((~self.reliable).sum())


def interference_ratio(ds: VprDataset, r: int, j: int, eps: float = DEFAULT_EPS) -> complex | None:
    """Raw ratio ``G_r[j]`` relating the target phase to the secondary phase.

    Returns None when ``2 |f1[j]| |f2_r[j]| <= eps``.
    """
    a1, a2 = ds.abs_f1[j], ds.abs_f2[r, j]
    den = 2.0 * a1 * a2
    if den <= eps:
        return None
    num = ds.abs_f3[r, j] ** 2 + 1j * ds.abs_f4[r, j] ** 2 - (1 + 1j) * (a1**2 + a2**2)
    return complex(num / den)


def interference_ratios(ds: VprDataset, eps: float = DEFAULT_EPS) -> Ratios:
    a1 = ds.abs_f1[None, :]
    den = 2.0 * a1 * ds.abs_f2
    num = ds.abs_f3**2 + 1j * ds.abs_f4**2 - (1 + 1j) * (a1**2 + ds.abs_f2**2)
    reliable = den > eps
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = np.where(reliable, num / np.where(reliable, den, 1.0), 0.0)
    mag = np.abs(raw)
    reliable &= mag > 0
    g = np.where(reliable, raw / np.where(mag > 0, mag, 1.0), 0.0)
    return Ratios(g, reliable)


def _support_kernel(n: int, s: int) -> np.ndarray:
    """``C[j, j'] = sum_{k=s}^{n-1} exp(2 pi i (j - j') k / n)``."""
    d = np.arange(n)
    k = np.arange(s, n)
    c = np.exp(2j * np.pi * np.outer(d, k) / n).sum(axis=1)
    idx = (d[:, None] - d[None, :]) % n
    return c[idx]


def assemble_quadratic(ds: VprDataset, s: int, weight: float = 1.0, eps: float = DEFAULT_EPS) -> np.ndarray:
    """Explicit ``A_s`` with support rows (scaled by ``sqrt(weight)``) then interference rows.

    Rows: for each signal block ``r`` and ``k = s..N-1`` the row
    ``|f_r[j]| exp(-2 pi i j k / N)`` on block ``r``; then for each secondary
    ``r`` and usable ``j`` the row ``e_j - g_r[j] e_{rN + j}``. The square root
    on ``weight`` makes ``y^H A^H A y`` carry the support term with factor
    ``weight``.
    """
    n, R = ds.n, ds.r_count
    if not 0 <= s <= n:
        raise ValueError("s must lie in [0, N]")
    ratios = interference_ratios(ds, eps)
    mags = np.vstack([ds.abs_f1[None, :], ds.abs_f2])
    k = np.arange(s, n)
    kern = np.exp(-2j * np.pi * np.outer(k, np.arange(n)) / n)
    rows = []
    for r in range(R + 1):
        blk = np.zeros((n - s, (R + 1) * n), dtype=complex)
        blk[:, r * n : (r + 1) * n] = np.sqrt(weight) * kern * mags[r][None, :]
        rows.append(blk)
    for r in range(R):
        use = np.nonzero(ratios.reliable[r])[0]
        blk = np.zeros((len(use), (R + 1) * n), dtype=complex)
        blk[np.arange(len(use)), use] = 1.0
        blk[np.arange(len(use)), (r + 1) * n + use] = -ratios.g[r, use]
        rows.append(blk)
    return np.vstack(rows)


class QuadraticForm:
    """Precomputed pieces of ``A_s^H A_s`` so a sweep only swaps the support kernel."""

    def __init__(self, ds: VprDataset, weight: float = 1.0, eps: float = DEFAULT_EPS):
        self.ds = ds
        self.weight = weight
        self.ratios = interference_ratios(ds, eps)
        n, R = ds.n, ds.r_count
        self.mags = np.vstack([ds.abs_f1[None, :], ds.abs_f2])
        inter = np.zeros((ds.dim, ds.dim), dtype=complex)
        rel = self.ratios.reliable
        g = self.ratios.g
        j = np.arange(n)
        inter[j, j] = rel.sum(axis=0)
        for r in range(R):
            b = (r + 1) * n + j
            inter[b, b] = rel[r].astype(float)
            inter[j, b] = -g[r] * rel[r]
            inter[b, j] = -g[r].conj() * rel[r]
        self.interference = inter
        # a coordinate with zero magnitude and no surviving interference row has
        # an all-zero column in A_s; it is unobservable and is left out
        touched = np.concatenate([rel.any(axis=0), rel.reshape(-1)])
        flat = self.mags.reshape(-1)
        observed = flat > ZERO_MAG_RTOL * max(float(flat.max(initial=0.0)), 1e-300)
        self.active = observed | touched

    @property
    def dropped(self) -> int:
        return self.ratios.dropped

    def reduced_gram(self, s: int) -> np.ndarray:
        return self.gram(s)[np.ix_(self.active, self.active)]

    def expand(self, y_active: np.ndarray) -> np.ndarray:
        y = np.zeros(self.ds.dim, dtype=complex)
        y[self.active] = y_active
        return y * np.sqrt(self.ds.dim) / np.linalg.norm(y)

    def solve(self, s: int) -> "EigPair":
        pair = smallest_eigpair(self.reduced_gram(s))
        pair.y = self.expand(pair.y)
        return pair

    def gram(self, s: int) -> np.ndarray:
        n = self.ds.n
        kern = _support_kernel(n, s)
        out = self.interference.copy()
        for r in range(self.ds.r_count + 1):
            sl = slice(r * n, (r + 1) * n)
            m = self.mags[r]
            out[sl, sl] += self.weight * (m[:, None] * kern * m[None, :])
        return out

    def cost(self, y: np.ndarray, s: int) -> tuple[float, float]:
        """Directly evaluated ``(support, interference)`` parts of the cost."""
        n, R = self.ds.n, self.ds.r_count
        y = np.asarray(y).reshape(R + 1, n)
        F = np.fft.fft(self.mags * y, axis=1)
        support = float(np.sum(np.abs(F[:, s:]) ** 2))
        res = (y[0][None, :] - y[1:] * self.ratios.g) * self.ratios.reliable
        return support, float(np.sum(np.abs(res) ** 2))


@dataclass
class EigPair:
    lambda_min: float
    lambda_second: float
    y: np.ndarray
    residual: float


def smallest_eigpair(gram: np.ndarray, dim_cap: int = DIM_CAP) -> EigPair:
    """Two smallest eigenvalues and the minimizing vector scaled to norm ``sqrt(dim)``."""
    dim = gram.shape[0]
    if dim > dim_cap:
        raise ValueError(f"Gram dimension {dim} exceeds cap {dim_cap}")
    if dim == 1:
        vals = np.linalg.eigvalsh(gram)
        return EigPair(float(vals[0]), float("inf"), np.ones(1, dtype=complex), 0.0)
    scale = np.linalg.norm(gram, ord=np.inf)
    if dim <= FULL_EIGH_LIMIT:
        vals, vecs = np.linalg.eigh(gram)
    else:
        vals, vecs = _smallest_pair_shift_invert(gram, scale)
    y = vecs[:, 0]
    residual = float(np.linalg.norm(gram @ y - vals[0] * y))
    if residual > 1e-8 * max(scale, 1e-300):
        raise np.linalg.LinAlgError(f"eigensolver did not converge: residual {residual:.3e}")
    # fix the global phase so the largest entry of the target block is real positive
    n_ref = np.argmax(np.abs(y))
    y = y * np.exp(-1j * np.angle(y[n_ref]))
    y = y / np.linalg.norm(y) * np.sqrt(dim)
    return EigPair(float(vals[0]), float(vals[1]), y, residual)


def _smallest_pair_shift_invert(gram: np.ndarray, scale: float) -> tuple[np.ndarray, np.ndarray]:
    # the Gram is PSD, so a small negative shift keeps G - sigma*I positive definite
    sigma = -1e-6 * max(scale, 1e-300)
    # fixed start vector keeps ARPACK deterministic
    v0 = np.ones(gram.shape[0], dtype=gram.dtype)
    vals, vecs = scipy.sparse.linalg.eigsh(gram, k=2, sigma=sigma, which="LM", tol=1e-12, v0=v0)
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def smallest_eigvals(gram: np.ndarray) -> np.ndarray:
    """The two smallest eigenvalues of a Hermitian PSD Gram matrix."""
    if gram.shape[0] <= FULL_EIGH_LIMIT:
        return np.linalg.eigvalsh(gram)[:2]
    return _smallest_pair_shift_invert(gram, np.linalg.norm(gram, ord=np.inf))[0]


class Strategy(str, Enum):
    MAX_DROP = "max_drop"
    FIRST_DECAY = "first_decay"


@dataclass
class SweepRecord:
    s: int
    lambda_min: float
    lambda_second: float


@dataclass
class SupportSweep:
    records: list[SweepRecord]
    s_star: int | None = None
    y: np.ndarray | None = None
    flagged: bool = False
    strategy: str = Strategy.MAX_DROP.value
    dropped: int = 0
    extras: dict = field(default_factory=dict)

    @property
    def s_values(self) -> np.ndarray:
        return np.array([r.s for r in self.records])

    @property
    def lambda_min(self) -> np.ndarray:
        return np.array([r.lambda_min for r in self.records])

    @property
    def lambda_second(self) -> np.ndarray:
        return np.array([r.lambda_second for r in self.records])

    def at(self, s: int) -> SweepRecord:
        for r in self.records:
            if r.s == s:
                return r
        raise KeyError(s)

    def csv_rows(self) -> list[tuple]:
        return [(r.s, r.lambda_min, r.lambda_second) for r in self.records]


def select_support(
    sweep: SupportSweep,
    strategy: Strategy | str = Strategy.MAX_DROP,
    onset_ratio: float = 2.0,
) -> tuple[int, bool]:
    """Pick ``s*`` from a sweep; returns ``(s_star, flagged)``.

    ``max_drop`` takes the largest relative fall ``lambda(s-1)/lambda(s)``.
    ``first_decay`` takes the first ``s`` where that ratio exceeds
    ``onset_ratio``. A sweep without a distinguished drop returns its first
    entry, flagged.
    """
    if not sweep.records:
        raise ValueError("empty sweep")
    strategy = Strategy(strategy)
    s = sweep.s_values
    # eigenvalues at roundoff level carry no ordering information; clamp them to
    # a common floor so ratios beyond the null point read as 1
    raw = sweep.lambda_min
    lam = np.maximum(raw, LAMBDA_FLOOR_RTOL * max(float(np.abs(raw).max()), 1e-300))
    if len(s) < 2:
        return int(s[0]), True
    ratios = lam[:-1] / lam[1:]
    if strategy is Strategy.FIRST_DECAY:
        hits = np.nonzero(ratios > onset_ratio)[0]
        if len(hits) == 0:
            return int(s[0]), True
        return int(s[hits[0] + 1]), False
    # no distinguished drop: all ratios equal to within rounding
    if np.allclose(ratios, ratios[0], rtol=1e-6, atol=0.0):
        return int(s[0]), True
    i = int(np.argmax(ratios))
    return int(s[i + 1]), False


def sweep_support(
    ds: VprDataset,
    s_range=None,
    weight: float = 1.0,
    strategy: Strategy | str = Strategy.MAX_DROP,
    s_override: int | None = None,
    eps: float = DEFAULT_EPS,
) -> SupportSweep:
    """Two smallest eigenvalues of ``A_s^H A_s`` over ``s_range`` and the vector at ``s*``."""
    if s_range is None:
        s_range = range(1, ds.n // 2 + 1)
    qf = QuadraticForm(ds, weight, eps)
    records = []
    for s in s_range:
        vals = smallest_eigvals(qf.reduced_gram(s))
        records.append(SweepRecord(int(s), float(vals[0]), float(vals[1])))
        log.debug("s=%d lambda_min=%.3e lambda_2=%.3e", s, vals[0], vals[1])
    sweep = SupportSweep(records, strategy=Strategy(strategy).value, dropped=qf.dropped)
    if s_override is not None:
        sweep.s_star, sweep.flagged = int(s_override), False
    else:
        sweep.s_star, sweep.flagged = select_support(sweep, strategy)
    sweep.y = qf.solve(sweep.s_star).y
    return sweep


def solve_at(ds: VprDataset, s: int, weight: float = 1.0, eps: float = DEFAULT_EPS) -> EigPair:
    return QuadraticForm(ds, weight, eps).solve(s)


def truncate_support(spectra: np.ndarray, sigma: int) -> tuple[np.ndarray, int]:
    """Zero every bin outside the ``sigma`` consecutive (cyclic) bins of largest joint energy.

    ``spectra`` is (S, N); all rows share one window, which is then rolled to
    start at bin 0 so the support is exactly ``{0, ..., sigma - 1}``. Returns
    the truncated spectra and the original window start.
    """
    spectra = np.atleast_2d(np.asarray(spectra, dtype=complex))
    n = spectra.shape[1]
    if not 1 <= sigma <= n:
        raise ValueError("sigma must lie in [1, N]")
    energy = np.sum(np.abs(spectra) ** 2, axis=0)
    window_energy = np.convolve(np.concatenate([energy, energy[: sigma - 1]]), np.ones(sigma), "valid")[:n]
    start = int(np.argmax(window_energy))
    rolled = np.roll(spectra, -start, axis=1)
    rolled[:, sigma:] = 0.0
    return rolled, start


def reconstruct(ds: VprDataset, y: np.ndarray, round_phases: bool = False) -> TimeSeries1D:
    """Target series estimate ``|f1[j]| * y[j]`` (optionally with ``y`` rounded to phases)."""
    y = np.asarray(y)
    if len(y) != ds.dim:
        raise ValueError(f"y has length {len(y)}, expected {ds.dim}")
    head = y[: ds.n].astype(complex)
    if round_phases:
        mag = np.abs(head)
        zero = mag == 0
        if zero.any():
            warnings.warn(f"{int(zero.sum())} zero entries rounded to phase 1")
        head = np.where(zero, 1.0, head / np.where(zero, 1.0, mag))
    return TimeSeries1D(ds.abs_f1 * head, ds.dt, "vpr")


def reconstructed_spectrum(ds: VprDataset, y: np.ndarray, round_phases: bool = False) -> dsp.Spectrum:
    ts = reconstruct(ds, y, round_phases)
    return dsp.Spectrum(dsp.dft1(ts.values), ts.total_time)
