"""Hybrid input-output phase retrieval for the two-dimensional embedding.

The ideal 2D spectrum is real and positive (triangular windows, commuting
``H`` and ``H_D``), so the Fourier-domain constraint is positivity of a real
array, while the object domain carries the measured magnitudes ``|f|`` and,
optionally, the classically computable phases of the ``t = 0`` row.

Arrays use the centered storage of :mod:`specfree.simcore`: entry ``[j, l]``
holds the sample at ``(j', l')`` with ``j = j' mod N`` and ``l = l' mod M``.
"""
from __future__ import annotations

import enum
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from specfree import dsp
from specfree.simcore import Hamiltonian, QuantumState, centered_indices

log = logging.getLogger(__name__)

DUMP_MAGIC = 0x48494F32  # ASCII "HIO2"
DUMP_VERSION = 1


class InitKind(str, enum.Enum):
    RANDOM_PHASE = "random_phase"
    FLAT = "flat"
    ABS_DFT = "abs_dft"


@dataclass(frozen=True)
class HioConfig:
    """Parameters of a HIO run.

    ``restarts`` counts runs beyond the first, so ``restarts=0`` is a single
    run and the residual history has ``iterations * (restarts + 1)`` entries.
    """

    beta: float = 0.9
    iterations: int = 5000
    restarts: int = 0
    seed: int = 0
    anchor_row0: bool = True
    init: InitKind = InitKind.RANDOM_PHASE

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if self.restarts < 0:
            raise ValueError("restarts must be nonnegative")
        object.__setattr__(self, "init", InitKind(self.init))


@dataclass(eq=False)
class HioState:
    """Working spectrum and the per-iteration residual history of every run."""

    F_current: np.ndarray
    residual_history: np.ndarray
    best_residual: float = float("inf")
    best_iteration: int = -1
    best_restart: int = -1
    extras: dict = field(default_factory=dict)


def classical_anchor_phases(
    hd: Hamiltonian, psi: QuantumState, dz: float, m: int
) -> np.ndarray:
    """Unit phases of ``f[0, l] = <psi| exp(i z_l H_D) |psi>`` in centered storage.

    Only valid for a diagonal ``H_D``: the sum then runs over the basis states
    carrying weight in ``psi``. Entries with vanishing value get phase 1.
    """
    if not hd.is_diagonal():
        raise ValueError("anchor phases need a diagonal H_D")
    d = np.real(np.diag(hd.matrix))
    w = np.abs(psi.amplitudes) ** 2
    occupied = w > 0
    z = centered_indices(m) * dz
    vals = np.exp(1j * np.outer(z, d[occupied])) @ w[occupied]
    mag = np.abs(vals)
    return np.where(mag > 1e-14, vals / np.where(mag > 0, mag, 1.0), 1.0)


def init_spectrum(abs_f: np.ndarray, cfg: HioConfig, restart: int = 0) -> np.ndarray:
    """Real, nonnegative starting spectrum ``F^1`` for run number ``restart``."""
    abs_f = np.asarray(abs_f, dtype=float)
    if cfg.init is InitKind.FLAT:
        return np.full(abs_f.shape, float(abs_f.sum()) / abs_f.size)
    if cfg.init is InitKind.ABS_DFT:
        return np.abs(dsp.dft2(abs_f))
    rng = np.random.default_rng([cfg.seed, restart])
    phases = np.exp(2j * np.pi * rng.random(abs_f.shape))
    return np.abs(dsp.dft2(abs_f * phases))


def magnitude_projection(f: np.ndarray, abs_f: np.ndarray, anchors: np.ndarray | None = None) -> np.ndarray:
    """Impose ``|f|`` (and row-0 anchor phases) while keeping the current phases."""
    mag = np.abs(f)
    phase = np.where(mag > 0, f / np.where(mag > 0, mag, 1.0), 1.0)
    if anchors is not None:
        phase = phase.copy()
        phase[0, :] = anchors
    return abs_f * phase


def _residual(f: np.ndarray, abs_f: np.ndarray, norm: float) -> float:
    return float(np.linalg.norm(np.abs(f) - abs_f) / norm)


def hio_run(
    abs_f: np.ndarray,
    cfg: HioConfig = HioConfig(),
    anchors: np.ndarray | None = None,
    F_init: np.ndarray | None = None,
) -> tuple[np.ndarray, HioState]:
    """Run HIO and return the lowest-residual iterate over all iterations and restarts.

    Parameters
    ----------
    abs_f
        Measured magnitudes, shape ``(N, M)`` with both sizes odd.
    cfg
        Iteration settings.
    anchors
        Unit phases for row ``j = 0`` (length ``M``); used only when
        ``cfg.anchor_row0`` is set.
    F_init
        Explicit starting spectrum for the first run (later restarts use
        :func:`init_spectrum`).
    """
    abs_f = np.asarray(abs_f, dtype=float)
    if abs_f.ndim != 2 or abs_f.shape[0] % 2 == 0 or abs_f.shape[1] % 2 == 0:
        raise ValueError("abs_f must be a 2D array with odd sizes")
    if np.any(abs_f < 0):
        raise ValueError("magnitudes must be nonnegative")
    use_anchors = None
    if cfg.anchor_row0 and anchors is not None:
        use_anchors = np.asarray(anchors, dtype=complex)
        if use_anchors.shape != (abs_f.shape[1],):
            raise ValueError("anchors must have length M")
    norm = max(float(np.linalg.norm(abs_f)), 1e-300)
    L = cfg.iterations
    history = np.empty(L * (cfg.restarts + 1))
    best_F, best = None, (float("inf"), -1, -1)
    F = None
    for run in range(cfg.restarts + 1):
        if run == 0 and F_init is not None:
            F = np.asarray(F_init, dtype=float).copy()
        else:
            F = init_spectrum(abs_f, cfg, run)
        for it in range(L):
            f = dsp.idft2(F)
            res = _residual(f, abs_f, norm)
            history[run * L + it] = res
            if res < best[0]:
                best, best_F = (res, it, run), F.copy()
            Ft = np.real(dsp.dft2(magnitude_projection(f, abs_f, use_anchors)))
            F = np.where(Ft > 0, Ft, F - cfg.beta * Ft)
        log.debug("run %d finished, best residual so far %.3e", run, best[0])
    state = HioState(F, history, best[0], best[1], best[2])
    return best_F, state


def extract_1d(F_rec: np.ndarray, total_time: float | None = None) -> dsp.Spectrum:
    """1D spectrum of the ``z = 0`` column of the retrieved signal."""
    col = dsp.idft2(F_rec)[:, 0]
    values = dsp.dft1(col)
    return dsp.Spectrum(values, total_time if total_time is not None else len(values))


def spectrum_csv_rows(F: np.ndarray) -> list[tuple[int, int, float]]:
    """Triples ``(k, m, value)`` in row-major order."""
    F = np.asarray(F, dtype=float)
    return [(k, m, float(F[k, m])) for k in range(F.shape[0]) for m in range(F.shape[1])]


def residual_csv_rows(state: HioState) -> list[tuple[int, float]]:
    return [(i, float(r)) for i, r in enumerate(state.residual_history)]


def write_dump(path: str | Path, F: np.ndarray) -> None:
    """Dense little-endian float64 dump with an 8-integer header."""
    F = np.ascontiguousarray(F, dtype="<f8")
    n, m = F.shape
    header = struct.pack("<8q", DUMP_MAGIC, DUMP_VERSION, n, m, 0, 0, 0, 0)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(F.tobytes(order="C"))


def read_dump(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    magic, version, n, m, *_ = struct.unpack("<8q", raw[:64])
    if magic != DUMP_MAGIC or version != DUMP_VERSION:
        raise ValueError("not a spectrum dump (bad magic or version)")
    return np.frombuffer(raw[64:], dtype="<f8").reshape(n, m).copy()
