"""Exact simulation of small Fermi-Hubbard lattices on the qubit Hilbert space.

Conventions
-----------
* Qubit 0 is the most significant bit of a basis index.
* Modes are ordered spin-up block first, then spin-down; inside a block the
  sites are numbered row-major on the ``rows x cols`` grid.
* A set bit means the mode is occupied (Jordan-Wigner image of ``a^dag a``
  is ``(I - Z)/2``).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from specfree.dsp import WindowKind, window

DEFAULT_DIM_CAP = 2**12


class DeskScaleExceeded(ValueError):
    """Requested Hilbert space is too large for dense diagonalization."""


class DegenerateEmbedding(ValueError):
    """The 2D embedding would collapse to a 1D problem."""


@dataclass(frozen=True)
class Lattice:
    rows: int
    cols: int
    spinful: bool = True
    periodic: bool = False

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("lattice dimensions must be positive")

    @property
    def n_sites(self) -> int:
        return self.rows * self.cols

    @property
    def n_modes(self) -> int:
        return self.n_sites * (2 if self.spinful else 1)

    @property
    def dim(self) -> int:
        return 2**self.n_modes

    def edges(self) -> list[tuple[int, int]]:
        """Nearest-neighbour site pairs ``(i, j)`` with ``i < j``.

        With ``periodic`` set, rows/columns of length > 2 are closed into rings.
        """
        out = set()
        for r in range(self.rows):
            for c in range(self.cols):
                s = r * self.cols + c
                if c + 1 < self.cols:
                    out.add((s, s + 1))
                elif self.periodic and self.cols > 2:
                    out.add((r * self.cols, s))
                if r + 1 < self.rows:
                    out.add((s, s + self.cols))
                elif self.periodic and self.rows > 2:
                    out.add((c, s))
        return sorted(out)

    def mode(self, site: int, spin: int = 0) -> int:
        return spin * self.n_sites + site

    def spin_blocks(self) -> list[list[int]]:
        if not self.spinful:
            return [list(range(self.n_sites))]
        return [list(range(self.n_sites)), list(range(self.n_sites, 2 * self.n_sites))]


@dataclass(frozen=True)
class FermiHubbardParams:
    tau: float = 1.0
    u: float = 4.0


@dataclass(eq=False)
class Hamiltonian:
    """Dense Hermitian operator with a lazily cached eigendecomposition."""

    matrix: np.ndarray
    scale: float = 1.0
    offset: float = 0.0
    degenerate: bool = False
    _eig: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("Hamiltonian matrix must be square")
        d = m.shape[0]
        if d & (d - 1):
            raise ValueError(f"dimension {d} is not a power of two")
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1

    @property
    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        if self._eig is None:
            self._eig = np.linalg.eigh(self.matrix)
        return self._eig

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.eig[0]

    @property
    def eigenvectors(self) -> np.ndarray:
        return self.eig[1]

    def is_diagonal(self, tol: float = 1e-12) -> bool:
        off = self.matrix - np.diag(np.diag(self.matrix))
        return bool(np.max(np.abs(off), initial=0.0) <= tol)

    def to_dict(self, with_matrix: bool = False) -> dict:
        out = {
            "dim": self.dim,
            "eigenvalues": [float(e) for e in self.eigenvalues],
            "scale": self.scale,
            "offset": self.offset,
        }
        if with_matrix:
            out["matrix"] = [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix]
        return out


@dataclass(eq=False)
class QuantumState:
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "amplitudes": [[float(z.real), float(z.imag)] for z in self.amplitudes],
        }


@dataclass(eq=False)
class TimeSeries1D:
    values: np.ndarray
    dt: float
    label: str = ""

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def total_time(self) -> float:
        return self.n * self.dt


@dataclass(eq=False)
class Signal2D:
    """Centered 2D samples stored at indices ``(j' mod N, l' mod M)``."""

    values: np.ndarray
    dt: float
    dz: float
    windowed: bool = True


def _check_dim(n_modes: int, dim_cap: int) -> int:
    dim = 2**n_modes
    if dim > dim_cap:
        raise DeskScaleExceeded(
            f"desk-scale exceeded: {n_modes} modes need Hilbert dimension {dim} > cap {dim_cap}"
        )
    return dim


def _occupations(n_modes: int) -> np.ndarray:
    """``occ[i, m]`` is the occupation of mode ``m`` in basis state ``i``."""
    idx = np.arange(2**n_modes)
    shifts = n_modes - 1 - np.arange(n_modes)
    return (idx[:, None] >> shifts[None, :]) & 1


def hopping_matrix(n_modes: int, p: int, q: int) -> np.ndarray:
    """Qubit image of ``a^dag_p a_q + a^dag_q a_p`` under Jordan-Wigner."""
    if p == q:
        raise ValueError("hopping needs two distinct modes")
    p, q = min(p, q), max(p, q)
    dim = 2**n_modes
    occ = _occupations(n_modes)
    out = np.zeros((dim, dim))
    # states with q occupied and p empty hop to p occupied / q empty
    src = np.nonzero((occ[:, q] == 1) & (occ[:, p] == 0))[0]
    bp = 1 << (n_modes - 1 - p)
    bq = 1 << (n_modes - 1 - q)
    dst = src + bp - bq
    parity = occ[src, p + 1 : q].sum(axis=1) % 2
    sign = 1.0 - 2.0 * parity
    out[dst, src] = sign
    out[src, dst] = sign
    return out


def build_fermi_hubbard(
    lattice: Lattice,
    params: FermiHubbardParams = FermiHubbardParams(),
    dim_cap: int = DEFAULT_DIM_CAP,
) -> Hamiltonian:
    n = lattice.n_modes
    dim = _check_dim(n, dim_cap)
    h = np.zeros((dim, dim))
    spins = (0, 1) if lattice.spinful else (0,)
    for i, j in lattice.edges():
        for s in spins:
            h -= params.tau * hopping_matrix(n, lattice.mode(i, s), lattice.mode(j, s))
    if lattice.spinful:
        occ = _occupations(n)
        double = np.zeros(dim)
        for v in range(lattice.n_sites):
            double += occ[:, lattice.mode(v, 0)] * occ[:, lattice.mode(v, 1)]
        h[np.diag_indices(dim)] += params.u * double
    return Hamiltonian(h.astype(complex))


def build_number_operator(lattice: Lattice, dim_cap: int = DEFAULT_DIM_CAP) -> Hamiltonian:
    n = lattice.n_modes
    _check_dim(n, dim_cap)
    weights = _occupations(n).sum(axis=1).astype(float)
    return Hamiltonian(np.diag(weights).astype(complex))


def normalize_to_band(h: Hamiltonian, lo: float = 0.0, hi: float = np.pi) -> Hamiltonian:
    """Affinely map the spectrum of ``h`` onto ``[lo, hi]``.

    The returned operator records ``scale`` and ``offset`` such that
    ``H_new = scale * H + offset * I``. A degenerate spectrum is shifted to
    ``lo`` with ``scale = 1`` and ``degenerate = True``.
    """
    if hi <= lo:
        raise ValueError("band must satisfy hi > lo")
    evals, evecs = h.eig
    e_min, e_max = evals[0], evals[-1]
    if np.isclose(e_max, e_min, rtol=0.0, atol=1e-12 * max(1.0, abs(e_max))):
        warnings.warn("degenerate spectrum: shifting to band floor without scaling")
        a, b, degenerate = 1.0, lo - e_min, True
    else:
        a = (hi - lo) / (e_max - e_min)
        b = lo - a * e_min
        degenerate = False
    m = a * h.matrix + b * np.eye(h.dim)
    new_evals = np.clip(a * evals + b, lo, hi) if not degenerate else a * evals + b
    return Hamiltonian(m, scale=a, offset=b, degenerate=degenerate, _eig=(new_evals, evecs))


def _bits_to_index(bits: str | Sequence[int]) -> tuple[int, int]:
    s = "".join(str(int(b)) for b in bits) if not isinstance(bits, str) else bits.replace(" ", "")
    if not s or set(s) - {"0", "1"}:
        raise ValueError(f"not a bitstring: {bits!r}")
    return int(s, 2), len(s)


def make_basis_state(bits: str | Sequence[int]) -> QuantumState:
    idx, n = _bits_to_index(bits)
    amps = np.zeros(2**n, dtype=complex)
    amps[idx] = 1.0
    return QuantumState(amps)


def make_superposition(terms: Sequence[tuple[complex, QuantumState]]) -> QuantumState:
    if not terms:
        raise ValueError("empty superposition")
    amps = sum(c * s.amplitudes for c, s in terms)
    norm = np.linalg.norm(amps)
    if norm < 1e-14:
        raise ValueError("superposition sums to the zero vector")
    return QuantumState(amps / norm)


def uniform_superposition(n_qubits: int) -> QuantumState:
    dim = 2**n_qubits
    return QuantumState(np.full(dim, dim**-0.5, dtype=complex))


def make_secondary_states(
    target: str,
    r_count: int,
    flips_per_state: int,
    seed: int,
    blocks: Sequence[Sequence[int]] | None = None,
    max_tries: int = 10_000,
) -> list[str]:
    """Bitstrings obtained from ``target`` by swapping unequally occupied pairs.

    Each output flips both bits of ``flips_per_state`` disjoint pairs (one
    occupied, one empty qubit), so the Hamming weight is preserved. With
    ``blocks`` every pair is drawn inside a single block, which keeps e.g. the
    per-spin particle numbers fixed.

    Returns bitstrings; wrap with :func:`make_basis_state` to get states.
    """
    target = target.replace(" ", "")
    n = len(target)
    bits = np.array([int(b) for b in target])
    if flips_per_state < 1 or 2 * flips_per_state > n:
        raise ValueError("flips_per_state must be in [1, n/2]")
    groups = [list(b) for b in blocks] if blocks is not None else [list(range(n))]

    pairs_avail = sum(
        min(int(bits[g].sum()), len(g) - int(bits[g].sum())) for g in groups
    )
    if pairs_avail < flips_per_state:
        raise ValueError(
            f"target has only {pairs_avail} disjoint unequal pairs, need {flips_per_state}"
        )

    possible = _count_reachable(bits, groups, flips_per_state)
    if possible < r_count:
        raise ValueError(f"only {possible} distinct secondary states are possible, asked for {r_count}")

    rng = np.random.default_rng(seed)
    seen: list[str] = []
    tries = 0
    while len(seen) < r_count:
        tries += 1
        if tries > max_tries:
            raise ValueError(f"could only generate {len(seen)} distinct states")
        new = bits.copy()
        # distribute the flips over blocks, then pair random ones with random zeros
        capacity = {gi: min(int(bits[g].sum()), len(g) - int(bits[g].sum())) for gi, g in enumerate(groups)}
        per_block = dict.fromkeys(capacity, 0)
        for _ in range(flips_per_state):
            open_blocks = [gi for gi in capacity if per_block[gi] < capacity[gi]]
            per_block[open_blocks[rng.integers(len(open_blocks))]] += 1
        for gi, k in per_block.items():
            if not k:
                continue
            g = np.array(groups[gi])
            ones = g[bits[g] == 1]
            zeros = g[bits[g] == 0]
            new[rng.choice(ones, k, replace=False)] = 0
            new[rng.choice(zeros, k, replace=False)] = 1
        s = "".join(map(str, new))
        if s != target and s not in seen:
            seen.append(s)
    return seen


def _count_reachable(bits: np.ndarray, groups: list[list[int]], p: int) -> int:
    from math import comb

    # polynomial in the number of flips: block contributes C(ones,k)*C(zeros,k) ways
    poly = [1]
    for g in groups:
        ones = int(bits[g].sum())
        zeros = len(g) - ones
        coeffs = [comb(ones, k) * comb(zeros, k) for k in range(min(ones, zeros) + 1)]
        out = [0] * (len(poly) + len(coeffs) - 1)
        for i, a in enumerate(poly):
            for j, b in enumerate(coeffs):
                out[i + j] += a * b
        poly = out
    return poly[p] if p < len(poly) else 0


def _spectral_weights(h: Hamiltonian, bra: QuantumState, ket: QuantumState) -> tuple[np.ndarray, np.ndarray]:
    evals, evecs = h.eig
    w = (evecs.conj().T @ bra.amplitudes).conj() * (evecs.conj().T @ ket.amplitudes)
    return evals, w


def signal_1d(
    h: Hamiltonian,
    bra: QuantumState,
    ket: QuantumState,
    dt: float,
    n_samples: int,
    label: str = "",
    start: int = 0,
) -> TimeSeries1D:
    """``f[j] = <bra| exp(i H j dt) |ket>`` for ``j = start .. start + n_samples - 1``."""
    evals, w = _spectral_weights(h, bra, ket)
    j = np.arange(start, start + n_samples)
    vals = np.exp(1j * np.outer(j * dt, evals)) @ w
    return TimeSeries1D(vals, dt, label)


def centered_indices(n: int) -> np.ndarray:
    """Centered sample offsets ``j'`` placed at storage index ``j' mod n``."""
    half = (n - 1) // 2
    out = np.empty(n, dtype=int)
    jp = np.arange(-half, half + 1)
    out[jp % n] = jp
    return out


def windowed_signal_1d(
    h: Hamiltonian, psi: QuantumState, dt: float, n: int, kind: WindowKind = WindowKind.TRIANGULAR
) -> TimeSeries1D:
    """Centered, windowed autocorrelation series in modulo storage order."""
    if n % 2 == 0:
        raise ValueError("centered sampling needs an odd number of samples")
    evals, w = _spectral_weights(h, psi, psi)
    jp = centered_indices(n)
    t = jp * dt
    vals = (np.exp(1j * np.outer(t, evals)) @ w) * window(t, n * dt, kind)
    return TimeSeries1D(vals, dt, "windowed")


def commutator_norm(a: Hamiltonian, b: Hamiltonian) -> float:
    c = a.matrix @ b.matrix - b.matrix @ a.matrix
    return float(np.max(np.abs(c)))


def signal_2d(
    h: Hamiltonian,
    hd: Hamiltonian,
    psi: QuantumState,
    dt: float,
    n: int,
    m: int | None = None,
    window_kind: WindowKind = WindowKind.TRIANGULAR,
    dz: float | None = None,
    commute_tol: float = 1e-9,
) -> Signal2D:
    """Windowed samples of ``<psi| e^{itH} e^{izH_D} |psi>`` on a centered grid.

    ``m`` defaults to ``n`` and ``dz`` to ``dt`` (equal total virtual time).
    """
    m = n if m is None else m
    if n % 2 == 0 or m % 2 == 0:
        raise ValueError("N and M must be odd")
    dz = dt if dz is None else dz
    scale = max(np.max(np.abs(h.matrix)), np.max(np.abs(hd.matrix)), 1.0)
    if commutator_norm(h, hd) > commute_tol * scale:
        raise ValueError("H and H_D do not commute; the 2D spectrum need not be positive")
    a = psi.amplitudes
    hd_mean = np.real(a.conj() @ hd.matrix @ a)
    hd_sq = np.real(np.linalg.norm(hd.matrix @ a) ** 2)
    if hd_sq - hd_mean**2 <= 1e-10:
        raise DegenerateEmbedding("degenerate 2D embedding: psi is an eigenstate of H_D")

    evals, evecs = h.eig
    # shared eigenbasis: diagonalize H_D inside each H eigenspace
    hd_in = evecs.conj().T @ hd.matrix @ evecs
    basis = evecs.copy()
    e_h = evals.copy()
    e_d = np.empty_like(evals)
    start = 0
    while start < len(evals):
        stop = start + 1
        while stop < len(evals) and abs(evals[stop] - evals[start]) < 1e-9 * max(1.0, abs(evals[start])):
            stop += 1
        blk = hd_in[start:stop, start:stop]
        dvals, dvecs = np.linalg.eigh((blk + blk.conj().T) / 2)
        e_d[start:stop] = dvals
        basis[:, start:stop] = evecs[:, start:stop] @ dvecs
        start = stop
    p = np.abs(basis.conj().T @ a) ** 2

    jp = np.arange(0, (n - 1) // 2 + 1)
    lp = centered_indices(m)
    t = jp * dt
    z = lp * dz
    # half-plane j' >= 0 only; the rest follows from f(-t,-z) = conj f(t,z)
    phase_t = np.exp(1j * np.outer(t, e_h)) * p
    phase_z = np.exp(1j * np.outer(z, e_d))
    half = phase_t @ phase_z.T
    if window_kind is not None:
        half = half * np.outer(window(t, n * dt, window_kind), window(z, m * dz, window_kind))
    vals = np.empty((n, m), dtype=complex)
    vals[jp, :] = half
    neg = np.arange(1, (n - 1) // 2 + 1)
    vals[(-neg) % n, :] = half[neg][:, (-np.arange(m)) % m].conj()
    return Signal2D(vals, dt, dz, windowed=window_kind is not None)
