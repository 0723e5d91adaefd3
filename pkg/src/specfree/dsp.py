"""Fourier conventions, windows, spectrum metrics and trivial-ambiguity alignment.

Forward transforms carry no prefactor, ``F[k] = sum_j f[j] exp(-2 pi i k j / N)``;
inverses carry ``1/N`` (``1/(N M)`` in 2D). These match ``numpy.fft``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class WindowKind(str, enum.Enum):
    RECTANGULAR = "rectangular"
    TRIANGULAR = "triangular"


def window(t: np.ndarray, total_time: float, kind: WindowKind | str = WindowKind.TRIANGULAR) -> np.ndarray:
    """Window supported on ``|t| <= T/2``."""
    kind = WindowKind(kind)
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) <= total_time / 2
    if kind is WindowKind.RECTANGULAR:
        return inside.astype(float)
    return np.where(inside, 1.0 - 2.0 * np.abs(t / total_time), 0.0)


@dataclass(eq=False)
class Spectrum:
    """Frequency-domain samples; ``total_time`` fixes ``omega_k = 2 pi k / T``."""

    values: np.ndarray
    total_time: float = 1.0
    total_time_z: float | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return np.shape(self.values)

    @property
    def n(self) -> int:
        return self.shape[0]

    def omegas(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.shape[0]) / self.total_time

    def etas(self) -> np.ndarray:
        tz = self.total_time if self.total_time_z is None else self.total_time_z
        return 2 * np.pi * np.arange(self.shape[1]) / tz


def dft1(f: np.ndarray) -> np.ndarray:
    return np.fft.fft(np.asarray(f, dtype=complex))


def idft1(F: np.ndarray) -> np.ndarray:
    return np.fft.ifft(np.asarray(F, dtype=complex))


def dft2(f: np.ndarray) -> np.ndarray:
    # row-then-column, same as fft2
    return np.fft.fft(np.fft.fft(np.asarray(f, dtype=complex), axis=1), axis=0)


def idft2(F: np.ndarray) -> np.ndarray:
    return np.fft.ifft(np.fft.ifft(np.asarray(F, dtype=complex), axis=1), axis=0)


def spectrum_of(series, total_time: float | None = None) -> Spectrum:
    """DFT of a ``TimeSeries1D`` (or a raw array) wrapped as a :class:`Spectrum`."""
    values = getattr(series, "values", series)
    if total_time is None:
        total_time = getattr(series, "total_time", len(values))
    return Spectrum(dft1(values), total_time)


def _vals(x) -> np.ndarray:
    return np.asarray(getattr(x, "values", x))


def spectrum_l1_error(a, b) -> float:
    """Mean absolute difference of magnitudes, ``(1/size) sum | |a| - |b| |``."""
    a, b = _vals(a), _vals(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.mean(np.abs(np.abs(a) - np.abs(b))))


@dataclass(frozen=True)
class AmbiguityTransform:
    """``T(F)[k] = exp(i phase) * R(F)[k - shift]`` with ``R`` conj-reflection or identity."""

    shift: tuple[int, ...] = (0,)
    conj_reflect: bool = False
    global_phase: float = 0.0

    def apply(self, F: np.ndarray) -> np.ndarray:
        F = np.asarray(F, dtype=complex)
        if self.conj_reflect:
            F = _reflect(F).conj()
        F = np.roll(F, self.shift, axis=tuple(range(F.ndim)))
        return np.exp(1j * self.global_phase) * F

    def invert(self, F: np.ndarray) -> np.ndarray:
        F = np.exp(-1j * self.global_phase) * np.asarray(F, dtype=complex)
        F = np.roll(F, tuple(-s for s in self.shift), axis=tuple(range(F.ndim)))
        if self.conj_reflect:
            F = _reflect(F).conj()
        return F

    @property
    def is_identity(self) -> bool:
        return not any(self.shift) and not self.conj_reflect and abs(self.global_phase) < 1e-12


def _reflect(F: np.ndarray) -> np.ndarray:
    """``F[-k]`` (indices mod size) along every axis."""
    out = F
    for ax in range(F.ndim):
        out = np.roll(np.flip(out, axis=ax), 1, axis=ax)
    return out


def _circular_l1(a_abs: np.ndarray, b_abs: np.ndarray) -> np.ndarray:
    """l1 error of ``roll(a, s)`` against ``b`` for every cyclic shift ``s`` (1D)."""
    n = len(a_abs)
    idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    return np.mean(np.abs(a_abs[idx] - b_abs[None, :]), axis=1)


def _shift_candidates_2d(a_abs: np.ndarray, b_abs: np.ndarray, count: int) -> list[tuple[int, int]]:
    corr = np.real(np.fft.ifft2(np.fft.fft2(b_abs) * np.fft.fft2(a_abs).conj()))
    flat = np.argsort(corr, axis=None)[::-1][:count]
    return [tuple(int(i) for i in np.unravel_index(f, corr.shape)) for f in flat]


def align_ambiguities(candidate, reference, candidates_2d: int = 16) -> tuple[AmbiguityTransform, np.ndarray]:
    """Undo shift / conjugate-reflection / global phase to best match ``reference``.

    1D spectra are searched exhaustively over all cyclic shifts. In 2D the
    magnitude cross-correlation (computed with FFTs) nominates the best
    ``candidates_2d`` shifts, which are then scored exactly.
    """
    cand = np.asarray(_vals(candidate), dtype=complex)
    ref = np.asarray(_vals(reference), dtype=complex)
    if cand.shape != ref.shape:
        raise ValueError(f"shape mismatch: {cand.shape} vs {ref.shape}")
    best = None
    for reflect in (False, True):
        base = _reflect(cand).conj() if reflect else cand
        if base.ndim == 1:
            errs = _circular_l1(np.abs(base), np.abs(ref))
            scored = [(float(errs[s]), (int(s),)) for s in range(len(errs))]
        else:
            shifts = _shift_candidates_2d(np.abs(base), np.abs(ref), candidates_2d)
            scored = [
                (spectrum_l1_error(np.roll(base, s, axis=(0, 1)), ref), s) for s in shifts
            ]
        for err, s in scored:
            # prefer smaller error; ties go to the unreflected, smallest shift
            key = (round(err, 14), reflect, s)
            if best is None or key < best[0]:
                best = (key, reflect, s)
    _, reflect, shift = best
    moved = AmbiguityTransform(shift, reflect, 0.0).apply(cand)
    overlap = np.vdot(moved, ref)
    phase = float(np.angle(overlap)) if abs(overlap) > 0 else 0.0
    if abs(phase) < 1e-13:
        phase = 0.0
    tr = AmbiguityTransform(shift, reflect, phase)
    return tr, tr.apply(cand)


@dataclass(frozen=True)
class PeakResult:
    bins: list[int]
    incomplete: bool


def peak_locations(F, count: int, min_separation: int = 1, rel_height: float = 0.0) -> PeakResult:
    """Greedy pick of the tallest local maxima of ``|F|`` (cyclic), kept ``min_separation`` apart.

    Maxima lower than ``rel_height * max|F|`` are ignored. When fewer than
    ``count`` maxima exist the remaining slots are filled from the lowest
    free indices and ``incomplete`` is set.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    mag = np.abs(_vals(F)).astype(float)
    n = len(mag)
    left, right = np.roll(mag, 1), np.roll(mag, -1)
    is_max = (mag > left) & (mag >= right) | (mag >= left) & (mag > right)
    is_max &= mag >= rel_height * mag.max()
    order = sorted(np.nonzero(is_max)[0], key=lambda k: (-mag[k], k))

    def far(k, chosen):
        return all(min(abs(k - c), n - abs(k - c)) >= min_separation for c in chosen)

    chosen: list[int] = []
    for k in order:
        if len(chosen) == count:
            break
        if far(k, chosen):
            chosen.append(int(k))
    incomplete = len(chosen) < count
    for k in range(n):
        if len(chosen) == count:
            break
        if k not in chosen and far(k, chosen):
            chosen.append(k)
    return PeakResult(chosen, incomplete)


def significant_peaks(F, rel_height: float = 0.1, min_separation: int = 2) -> list[int]:
    """All local maxima at least ``rel_height`` of the tallest, tallest first."""
    res = peak_locations(F, len(_vals(F)), min_separation, rel_height)
    mag = np.abs(_vals(F))
    return [k for k in res.bins if mag[k] >= rel_height * mag.max() and _is_local_max(mag, k)]


def _is_local_max(mag: np.ndarray, k: int) -> bool:
    n = len(mag)
    return mag[k] >= mag[(k - 1) % n] and mag[k] >= mag[(k + 1) % n]


def match_peaks(ideal: list[int], recovered: list[int], n: int, tol: int = 1) -> dict[int, int | None]:
    """Map each ideal bin to a recovered bin within cyclic distance ``tol`` (or None)."""
    out: dict[int, int | None] = {}
    for k in ideal:
        hits = [r for r in recovered if min(abs(r - k), n - abs(r - k)) <= tol]
        out[k] = min(hits, key=lambda r: min(abs(r - k), n - abs(r - k))) if hits else None
    return out


def spectrum_csv_rows(spec: Spectrum) -> list[tuple]:
    """Rows ``(k, omega_k, re, im, abs)`` for a 1D spectrum."""
    vals = np.asarray(spec.values)
    om = spec.omegas()
    return [
        (k, float(om[k]), float(vals[k].real), float(vals[k].imag), float(abs(vals[k])))
        for k in range(len(vals))
    ]
