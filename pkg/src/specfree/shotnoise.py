"""Finite-shot magnitude estimates under a binomial measurement model.

Every estimate draws from its own counter-based Philox stream keyed by
``(seed, signal label, index)``, so results do not depend on evaluation order
or on which other entries were sampled.
"""
from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

P_SLACK = 1e-9


@dataclass(frozen=True)
class ShotConfig:
    """Number of binomial trials per estimate and the 64-bit master seed."""

    shots: int
    seed: int = 0

    def __post_init__(self):
        if int(self.shots) < 1:
            raise ValueError("shots must be a positive integer")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")


def label_id(label: str) -> int:
    return zlib.crc32(label.encode("utf-8"))


def stream(cfg: ShotConfig, label: str = "", index: int = 0) -> np.random.Generator:
    """Independent generator for one ``(seed, label, index)`` address."""
    if not 0 <= index < 2**32:
        raise ValueError("index must fit in 32 bits")
    key = int(cfg.seed) | (label_id(label) << 64) | (int(index) << 96)
    return np.random.Generator(np.random.Philox(key=key))


def _check_p(p: float) -> float:
    if not -P_SLACK <= p <= 1 + P_SLACK:
        raise ValueError(f"probability {p!r} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def estimate_abs2(p: float, cfg: ShotConfig, label: str = "", index: int = 0) -> float:
    """``M0 / M`` with ``M0 ~ Binomial(M, p)``."""
    p = _check_p(float(p))
    return int(stream(cfg, label, index).binomial(cfg.shots, p)) / cfg.shots


def noisy_magnitude(f_value: complex, scale: float, cfg: ShotConfig, label: str = "", index: int = 0) -> float:
    """Sampled estimate of ``|f_value|``.

    The measured probability is ``|f_value|**2 / scale``; ``scale`` is the squared
    norm of the prepared superposition (1 for a plain overlap, 2 for the
    interference of two orthogonal states).
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    p = abs(complex(f_value)) ** 2 / scale
    return float(np.sqrt(scale * estimate_abs2(p, cfg, label, index)))


def noisy_magnitudes(values: np.ndarray, scale: float, cfg: ShotConfig, label: str = "") -> np.ndarray:
    """Entrywise :func:`noisy_magnitude`; entry ``i`` of the flattened array uses index ``i``."""
    values = np.asarray(values)
    flat = values.reshape(-1)
    out = np.array([noisy_magnitude(v, scale, cfg, label, i) for i, v in enumerate(flat)])
    return out.reshape(values.shape)


def superposition_scale(a: np.ndarray, b: np.ndarray, phase: complex = 1.0) -> float:
    """``|| a + phase * b ||**2`` for state vectors ``a`` and ``b``."""
    return float(np.linalg.norm(np.asarray(a) + phase * np.asarray(b)) ** 2)


def noisy_magnitudes_hermitian(values: np.ndarray, scale: float, cfg: ShotConfig, label: str = "") -> tuple[np.ndarray, int]:
    """Sample a conjugate-symmetric 2D array once per ``{(j, l), (-j, -l)}`` pair.

    ``|f[-j, -l]| = |f[j, l]|`` exactly, so only the representative with the
    smaller flattened index is measured and mirrored to its partner. Returns
    the magnitudes and the number of distinct entries sampled.
    """
    values = np.asarray(values)
    n, m = values.shape
    jj, ll = np.meshgrid(np.arange(n), np.arange(m), indexing="ij")
    flat = jj * m + ll
    partner = ((-jj) % n) * m + (-ll) % m
    reps = np.nonzero((flat <= partner).reshape(-1))[0]
    out = np.empty(n * m)
    vals = values.reshape(-1)
    part = partner.reshape(-1)
    for i in reps:
        out[i] = out[part[i]] = noisy_magnitude(vals[i], scale, cfg, label, int(i))
    return out.reshape(n, m), len(reps)
