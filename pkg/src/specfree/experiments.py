"""Experiment recipes, config validation and artifact/manifest writing.

A run takes an :class:`ExperimentConfig`, fills every unset field from the
recipe for its ``experiment``, and writes plot-ready CSV files, a metrics
JSON and a manifest holding the fully resolved config. Feeding the manifest
back to :func:`run` reproduces every CSV/JSON artifact byte for byte; wall
clock timings go to a separate ``timing.json`` for that reason.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from specfree import dsp, gatecost, hio2d, shotnoise, simcore, vpr

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
EXPERIMENTS = (
    "vpr_noiseless_support",
    "vpr_r_resilience",
    "hio_2x2",
    "head_to_head",
    "gatecost_table",
    "custom",
)
METHODS = ("vpr", "hio")
OUTPUT_ENV = "SPECFREE_OUTPUT_DIR"


class ConfigError(ValueError):
    """Invalid or incomplete experiment configuration; ``field`` names the culprit."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class ExperimentConfig:
    """Everything a run needs. ``None`` means "take the recipe default"."""

    experiment: str
    method: str | None = None
    # system
    rows: int | None = None
    cols: int | None = None
    spinful: bool | None = None
    periodic: bool | None = None
    tau: float | None = None
    u: float | None = None
    normalize_band: bool | None = None
    state: Any = None  # bitstring, "uniform", or [[re, im, bits], ...]
    dim_cap: int | None = None
    # sampling grid
    dt: float | None = None
    n: int | None = None
    m: int | None = None
    dz: float | None = None
    total_time: float | None = None
    # measurement
    shots: int | None = None
    shots_budget: int | None = None
    noise_seeds: list[int] | None = None
    # vectorial retrieval
    r_count: int | None = None
    r_compare: list[int] | None = None
    flips: int | None = None
    secondary_seed: int | None = None
    sigma: int | None = None
    s_min: int | None = None
    s_max: int | None = None
    s_override: int | None = None
    strategy: str | None = None
    weight: float | None = None
    round_phases: bool | None = None
    # hybrid input-output
    beta: float | None = None
    iterations: int | None = None
    restarts: int | None = None
    hio_seed: int | None = None
    anchor_row0: bool | None = None
    init: str | None = None
    # gate cost
    gate_n: int | None = None
    gate_k: int | None = None
    # output
    output_dir: str | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown field")
        if "experiment" not in data:
            raise ConfigError("experiment", "missing")
        cfg = cls(**data)
        cfg._explicit_null = {k for k, v in data.items() if v is None}
        return cfg

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}


# recipe defaults; anything not listed stays None (unused by that experiment)
_FH_1X5 = dict(rows=1, cols=5, spinful=True, periodic=False, tau=1.0, u=4.0, normalize_band=False)
_FH_2X2 = dict(rows=2, cols=2, spinful=True, periodic=False, tau=1.0, u=4.0)
_VPR_COMMON = dict(flips=1, secondary_seed=1, weight=1.0, strategy="max_drop", round_phases=False)
_HIO_COMMON = dict(beta=0.9, iterations=5000, restarts=0, hio_seed=0, anchor_row0=True, init="random_phase")

# two basis states with 4 and 6 particles: spread over H_D sectors for the 2D
# embedding, while keeping few enough lines that +-1 bin matching is meaningful
HEAD_TO_HEAD_STATE = [[1.0, 0.0, "10010110"], [1.0, 0.0, "11011110"]]

RECIPES: dict[str, dict] = {
    "vpr_noiseless_support": dict(
        method="vpr", **_FH_1X5, **_VPR_COMMON, state="1010101010", dt=0.133, n=300,
        r_count=1, sigma=25, s_min=1, s_max=150, shots=None, noise_seeds=[0],
    ),
    "vpr_r_resilience": dict(
        method="vpr", **_FH_1X5, **_VPR_COMMON, state="1010101010", dt=0.133, n=300,
        r_count=10, r_compare=[1, 10], shots=10**6, noise_seeds=[0, 1, 2, 3, 4],
        s_min=100, s_max=110, s_override=105,
    ),
    "hio_2x2": dict(
        method="hio", **_FH_2X2, **_HIO_COMMON, normalize_band=True, state="uniform",
        n=225, m=225, total_time=112.0, shots=None, noise_seeds=[0],
    ),
    "head_to_head": dict(
        method="both", **_FH_2X2, **{**_VPR_COMMON, "flips": 2}, **_HIO_COMMON, normalize_band=False,
        state=HEAD_TO_HEAD_STATE, dt=0.12, total_time=15.0, m=25, r_count=10,
        shots=10**5, noise_seeds=[0], s_min=1,
    ),
    "gatecost_table": dict(gate_n=100, gate_k=25),
    "custom": dict(
        **_VPR_COMMON, **_HIO_COMMON, spinful=True, periodic=False, tau=1.0, u=4.0,
        normalize_band=False, noise_seeds=[0], s_min=1,
    ),
}

REQUIRED = {
    "vpr": ("rows", "cols", "state", "dt", "n", "r_count"),
    "hio": ("rows", "cols", "state", "n"),
    "both": ("rows", "cols", "state", "dt", "total_time", "m", "r_count"),
}


def resolve(cfg: ExperimentConfig) -> ExperimentConfig:
    """Fill defaults from the recipe and validate; raises :class:`ConfigError`."""
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError("experiment", f"must be one of {', '.join(EXPERIMENTS)}")
    explicit_null = getattr(cfg, "_explicit_null", set())
    out = dataclasses.replace(cfg)
    for key, value in RECIPES[cfg.experiment].items():
        if getattr(out, key) is None and key not in explicit_null:
            setattr(out, key, value)
    if out.output_dir is None:
        out.output_dir = os.environ.get(OUTPUT_ENV, f"runs/{out.experiment}")
    if out.experiment == "gatecost_table":
        for key in ("gate_n", "gate_k"):
            _need_int(out, key, 1)
        return out
    if out.experiment == "custom" and out.method not in METHODS:
        raise ConfigError("method", f"custom runs need method in {METHODS}")
    for key in REQUIRED[out.method]:
        if getattr(out, key) is None:
            raise ConfigError(key, "missing")
    if out.method == "hio" and out.dt is None and out.total_time is None:
        raise ConfigError("dt", "missing (give dt or total_time)")
    _validate_values(out)
    return out


def _need_int(cfg, key, lo):
    v = getattr(cfg, key)
    if not isinstance(v, int) or isinstance(v, bool) or v < lo:
        raise ConfigError(key, f"must be an integer >= {lo}")


def _validate_values(cfg: ExperimentConfig) -> None:
    for key in ("rows", "cols"):
        _need_int(cfg, key, 1)
    if cfg.n is not None:
        _need_int(cfg, "n", 2)
    if cfg.dt is not None and not (isinstance(cfg.dt, (int, float)) and cfg.dt > 0):
        raise ConfigError("dt", "must be a positive number")
    if cfg.total_time is not None and not cfg.total_time > 0:
        raise ConfigError("total_time", "must be positive")
    if cfg.shots is not None:
        _need_int(cfg, "shots", 1)
    if cfg.shots_budget is not None:
        _need_int(cfg, "shots_budget", 1)
    if cfg.r_count is not None:
        _need_int(cfg, "r_count", 1)
    if cfg.beta is not None and not 0 <= cfg.beta <= 1:
        raise ConfigError("beta", "must lie in [0, 1]")
    if cfg.iterations is not None:
        _need_int(cfg, "iterations", 1)
    if cfg.strategy is not None and cfg.strategy not in {s.value for s in vpr.Strategy}:
        raise ConfigError("strategy", "unknown support-selection strategy")
    if cfg.noise_seeds is not None and (
        not isinstance(cfg.noise_seeds, list) or not all(isinstance(s, int) and s >= 0 for s in cfg.noise_seeds)
    ):
        raise ConfigError("noise_seeds", "must be a list of nonnegative integers")
    if not cfg.noise_seeds:
        raise ConfigError("noise_seeds", "must not be empty")


# ---------------------------------------------------------------- system setup


def build_state(spec, n_modes: int) -> simcore.QuantumState:
    if spec == "uniform":
        return simcore.uniform_superposition(n_modes)
    if isinstance(spec, str):
        if len(spec) != n_modes:
            raise ConfigError("state", f"bitstring must have {n_modes} characters")
        return simcore.make_basis_state(spec)
    try:
        terms = [(complex(re, im), simcore.make_basis_state(bits)) for re, im, bits in spec]
    except (TypeError, ValueError) as exc:
        raise ConfigError("state", f"cannot parse superposition terms ({exc})") from None
    if any(t[1].dim != 2**n_modes for t in terms):
        raise ConfigError("state", f"bitstrings must have {n_modes} characters")
    return simcore.make_superposition(terms)


def _lead_bits(spec) -> str:
    if isinstance(spec, str):
        return spec
    return spec[0][2]


def build_system(cfg: ExperimentConfig):
    lattice = simcore.Lattice(cfg.rows, cfg.cols, cfg.spinful, cfg.periodic)
    cap = cfg.dim_cap or simcore.DEFAULT_DIM_CAP
    h = simcore.build_fermi_hubbard(lattice, simcore.FermiHubbardParams(cfg.tau, cfg.u), dim_cap=cap)
    if cfg.normalize_band:
        h = simcore.normalize_to_band(h)
    return lattice, h, build_state(cfg.state, lattice.n_modes)


# ------------------------------------------------------------------ artifacts


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path: Path, data) -> None:
    path.write_text(json.dumps(_clean(data), indent=2, sort_keys=True) + "\n")


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


SPECTRUM_HEADER = ["k", "omega", "re", "im", "abs"]


def write_spectrum(path: Path, values: np.ndarray, total_time: float) -> None:
    write_csv(path, SPECTRUM_HEADER, dsp.spectrum_csv_rows(dsp.Spectrum(values, total_time)))


def read_spectrum(path: Path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([float(r["re"]) + 1j * float(r["im"]) for r in rows])


@dataclass
class RunResult:
    output_dir: Path
    manifest: dict
    metrics: dict
    timing: dict = field(default_factory=dict)


# -------------------------------------------------------------------- helpers


def peak_report(ideal: np.ndarray, retrieved: np.ndarray, rel_height: float = 0.1, tol: int = 1) -> dict:
    """Significant ideal peaks and their matches among the retrieved peaks."""
    n = len(ideal)
    ideal_peaks = dsp.significant_peaks(ideal, rel_height)
    got = dsp.peak_locations(retrieved, max(len(ideal_peaks), 1) * 3, 2).bins
    matches = dsp.match_peaks(ideal_peaks, got, n, tol)
    return {
        "ideal_peaks": ideal_peaks,
        "matches": {str(k): v for k, v in matches.items()},
        "all_matched": all(v is not None for v in matches.values()),
    }


def top_peak_report(ideal: np.ndarray, retrieved: np.ndarray, count: int = 5, tol: int = 1) -> dict:
    n = len(ideal)
    ideal_top = dsp.peak_locations(ideal, count, 2).bins
    got_top = dsp.peak_locations(retrieved, count, 2).bins
    matches = dsp.match_peaks(ideal_top, got_top, n, tol)
    return {
        "ideal_top": ideal_top,
        "retrieved_top": got_top,
        "matches": {str(k): v for k, v in matches.items()},
        "all_matched": all(v is not None for v in matches.values()),
    }


def _secondaries(cfg: ExperimentConfig, lattice, r_count: int) -> list[str]:
    return simcore.make_secondary_states(
        _lead_bits(cfg.state), r_count, cfg.flips, seed=cfg.secondary_seed, blocks=lattice.spin_blocks()
    )


def vpr_signals(cfg: ExperimentConfig, lattice, h, phi, r_count: int):
    """Target series, secondary series (R, N) and the interference normalizations."""
    f1 = simcore.signal_1d(h, phi, phi, cfg.dt, cfg.n, "f1").values
    sec = [simcore.make_basis_state(b) for b in _secondaries(cfg, lattice, r_count)]
    f2 = np.array([simcore.signal_1d(h, phi, s, cfg.dt, cfg.n).values for s in sec])
    s3 = np.array([shotnoise.superposition_scale(phi.amplitudes, s.amplitudes, 1.0) for s in sec])
    s4 = np.array([shotnoise.superposition_scale(phi.amplitudes, s.amplitudes, 1j) for s in sec])
    return f1, f2, s3, s4


def vpr_budget(r_count: int, n: int, shots: int | None) -> int | None:
    return None if shots is None else (3 * r_count + 1) * n * shots


def hio_budget(n: int, m: int, shots: int | None) -> int | None:
    return None if shots is None else ((n * m + 1) // 2) * shots


def _s_range(cfg: ExperimentConfig) -> range:
    lo = cfg.s_min if cfg.s_min is not None else 1
    hi = cfg.s_max if cfg.s_max is not None else cfg.n // 2
    if not 0 <= lo <= hi <= cfg.n:
        raise ConfigError("s_min", "need 0 <= s_min <= s_max <= n")
    return range(lo, hi + 1)


# ---------------------------------------------------------------- VPR recipes


def _vpr_one(cfg, ds: vpr.VprDataset, ideal: np.ndarray, out: Path, tag: str, metrics: dict) -> dict:
    sweep = vpr.sweep_support(ds, _s_range(cfg), cfg.weight, cfg.strategy, cfg.s_override)
    write_csv(out / f"sweep{tag}.csv", ["s", "lambda_min", "lambda_second"], sweep.csv_rows())
    auto_s, auto_flag = vpr.select_support(sweep, cfg.strategy)
    rec = {}
    for rounded in (False, True):
        spec = vpr.reconstructed_spectrum(ds, sweep.y, rounded).values
        tr, aligned = dsp.align_ambiguities(spec, ideal)
        key = "rounded" if rounded else "unrounded"
        rec[key] = {
            "l1": dsp.spectrum_l1_error(aligned, ideal),
            "align": {"shift": tr.shift[0], "conj_reflect": tr.conj_reflect, "phase": tr.global_phase},
        }
        if rounded == bool(cfg.round_phases):
            write_spectrum(out / f"retrieved{tag}.csv", aligned, cfg.n * cfg.dt)
            rec["peaks"] = peak_report(ideal, aligned)
            rec["top5"] = top_peak_report(ideal, aligned)
    lam = {r.s: r.lambda_min for r in sweep.records}
    lam2 = {r.s: r.lambda_second for r in sweep.records}
    ratio = None
    if sweep.s_star in lam and sweep.s_star - 1 in lam:
        ratio = abs(lam[sweep.s_star - 1]) / max(abs(lam[sweep.s_star]), 1e-300)
    rec.update(
        s_star=sweep.s_star,
        s_auto=auto_s,
        s_auto_flagged=auto_flag,
        drop_ratio_at_s_star=ratio,
        lambda_at_s_star=lam.get(sweep.s_star),
        lambda_second_at_s_star=lam2.get(sweep.s_star),
        dropped_rows=sweep.dropped,
    )
    metrics[tag.lstrip("_") or "main"] = rec
    return rec


def run_vpr(cfg: ExperimentConfig, out: Path) -> tuple[dict, dict]:
    lattice, h, phi = build_system(cfg)
    r_values = cfg.r_compare or [cfg.r_count]
    r_max = max(r_values)
    f1, f2, s3, s4 = vpr_signals(cfg, lattice, h, phi, r_max)
    metrics: dict = {}
    if cfg.sigma is not None:
        trunc, start = vpr.truncate_support(np.fft.fft(np.vstack([f1[None, :], f2]), axis=1), cfg.sigma)
        series = np.fft.ifft(trunc, axis=1)
        f1, f2 = series[0], series[1:]
        metrics["truncation_start"] = start
        if cfg.shots is not None:
            raise ConfigError("shots", "artificial truncation is a noiseless construction")
    ideal = dsp.dft1(f1)
    write_spectrum(out / "ideal_spectrum.csv", ideal, cfg.n * cfg.dt)
    budget = {}
    for seed in cfg.noise_seeds:
        if cfg.shots is None:
            full = vpr.VprDataset.from_signals(f1, f2, cfg.dt)
        else:
            full = vpr.VprDataset.sampled(f1, f2, shotnoise.ShotConfig(cfg.shots, seed), cfg.dt, s3, s4)
        for r in r_values:
            tag = "" if len(r_values) == 1 and len(cfg.noise_seeds) == 1 else f"_R{r}_seed{seed}"
            _vpr_one(cfg, full.subset(r), ideal, out, tag, metrics)
            budget[f"R{r}"] = vpr_budget(r, cfg.n, cfg.shots)
        if cfg.shots is None:
            break
    metrics["budget"] = budget
    primary = {"ideal": "ideal_spectrum.csv"}
    if (out / "retrieved.csv").exists():
        primary["retrieved"] = "retrieved.csv"
    return metrics, primary


# ---------------------------------------------------------------- HIO recipes


def hio_grid(cfg: ExperimentConfig) -> tuple[int, int, float, float]:
    n = cfg.n
    m = cfg.m if cfg.m is not None else n
    total = cfg.total_time if cfg.total_time is not None else n * cfg.dt
    dt = cfg.dt if cfg.dt is not None and cfg.total_time is None else total / n
    dz = cfg.dz if cfg.dz is not None else total / m
    return n, m, dt, dz


def window_grid(n: int, m: int, dt: float, dz: float) -> np.ndarray:
    wt = dsp.window(simcore.centered_indices(n) * dt, n * dt)
    wz = dsp.window(simcore.centered_indices(m) * dz, m * dz)
    return np.outer(wt, wz)


def run_hio(cfg: ExperimentConfig, out: Path, tag: str = "") -> tuple[dict, dict]:
    lattice, h, psi = build_system(cfg)
    hd = simcore.build_number_operator(lattice, dim_cap=cfg.dim_cap or simcore.DEFAULT_DIM_CAP)
    n, m, dt, dz = hio_grid(cfg)
    if n % 2 == 0 or m % 2 == 0:
        raise ConfigError("n" if n % 2 == 0 else "m", "HIO grids need odd sizes")
    sig = simcore.signal_2d(h, hd, psi, dt, n, m, dz=dz)
    ideal = dsp.dft1(sig.values[:, 0])
    total = n * dt
    write_spectrum(out / f"ideal_spectrum{tag}.csv", ideal, total)
    sampled = None
    if cfg.shots is None:
        abs_f = np.abs(sig.values)
    else:
        raw = simcore.signal_2d(h, hd, psi, dt, n, m, window_kind=None, dz=dz)
        est, sampled = shotnoise.noisy_magnitudes_hermitian(
            raw.values, 1.0, shotnoise.ShotConfig(cfg.shots, cfg.noise_seeds[0]), "f2d"
        )
        abs_f = est * window_grid(n, m, dt, dz)
    anchors = hio2d.classical_anchor_phases(hd, psi, dz, m)
    hcfg = hio2d.HioConfig(cfg.beta, cfg.iterations, cfg.restarts, cfg.hio_seed, cfg.anchor_row0, cfg.init)
    F_rec, state = hio2d.hio_run(abs_f, hcfg, anchors)
    write_csv(out / f"residuals{tag}.csv", ["iter", "residual"], hio2d.residual_csv_rows(state))
    write_csv(out / f"spectrum2d{tag}.csv", ["k", "m", "value"], hio2d.spectrum_csv_rows(F_rec))
    hio2d.write_dump(out / f"spectrum2d{tag}.bin", F_rec)
    rec1 = hio2d.extract_1d(F_rec, total).values
    tr, aligned = dsp.align_ambiguities(rec1, ideal)
    write_spectrum(out / f"retrieved{tag}.csv", aligned, total)
    F_ideal = dsp.dft2(sig.values)
    metrics = {
        "l1": dsp.spectrum_l1_error(aligned, ideal),
        "align": {"shift": tr.shift[0], "conj_reflect": tr.conj_reflect, "phase": tr.global_phase},
        "best_residual": state.best_residual,
        "best_iteration": state.best_iteration,
        "best_restart": state.best_restart,
        "peaks": peak_report(ideal, aligned),
        "ideal_2d_max_imag": float(np.abs(F_ideal.imag).max()),
        "ideal_2d_min_real": float(F_ideal.real.min()),
        "sampled_entries": sampled,
        "budget": hio_budget(n, m, cfg.shots),
        "grid": {"n": n, "m": m, "dt": dt, "dz": dz},
    }
    return metrics, {"ideal": f"ideal_spectrum{tag}.csv", "retrieved": f"retrieved{tag}.csv"}


# ------------------------------------------------------------ head to head


def run_head_to_head(cfg: ExperimentConfig, out: Path) -> tuple[dict, dict]:
    n = int(round(cfg.total_time / cfg.dt))
    if n % 2 == 0:
        n += 1
    m = cfg.m
    vpr_units = (3 * cfg.r_count + 1) * n
    hio_units = (n * m + 1) // 2
    if cfg.shots_budget is not None:
        budget = cfg.shots_budget
        vpr_shots = budget // vpr_units
    elif cfg.shots is not None:
        vpr_shots = cfg.shots
        budget = vpr_units * vpr_shots
    else:
        raise ConfigError("shots", "head_to_head needs shots (per signal per time point) or shots_budget")
    hio_shots = budget // hio_units
    if vpr_shots < 1 or hio_shots < 1:
        raise ConfigError("shots_budget", "too small for the chosen grid")
    sub = {}
    for name in ("vpr", "hio"):
        d = out / name
        d.mkdir(parents=True, exist_ok=True)
        child = dataclasses.replace(
            cfg,
            experiment="custom",
            method=name,
            n=n,
            shots=vpr_shots if name == "vpr" else hio_shots,
            s_max=n // 2 if cfg.s_max is None else cfg.s_max,
            total_time=None if name == "vpr" else cfg.total_time,
            dt=cfg.dt,
            output_dir=str(d),
            r_compare=None,
        )
        if name == "hio":
            child.dt = None
        sub[name] = run(child)
    report = compare(sub["vpr"].output_dir / "manifest.json", sub["hio"].output_dir / "manifest.json", out)
    metrics = {
        "vpr": sub["vpr"].metrics,
        "hio": sub["hio"].metrics,
        "compare": report,
        "shots": {"vpr_per_signal_per_time": vpr_shots, "hio_per_entry": hio_shots},
        "reference_3x3": {"vpr_l1": 0.0018, "hio_l1": 0.0028},
    }
    return metrics, {"compare": "compare.json"}


# ----------------------------------------------------------------- gate cost


def run_gatecost(cfg: ExperimentConfig, out: Path) -> tuple[dict, dict]:
    rows = gatecost.table_rows(cfg.gate_n, cfg.gate_k)
    cols = list(rows[0])
    write_csv(out / "gatecost.csv", cols, [[r[c] for c in cols] for r in rows])
    (out / "gatecost.md").write_text(gatecost.table_markdown(cfg.gate_n, cfg.gate_k) + "\n")
    return {"rows": rows}, {"table": "gatecost.csv"}


# ----------------------------------------------------------------------- run


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"not valid JSON ({exc})") from None
    if isinstance(data, dict) and "schema_version" in data and "config" in data:
        data = data["config"]  # a manifest: rerun its resolved config
    return ExperimentConfig.from_dict(data)


def run(cfg: ExperimentConfig) -> RunResult:
    cfg = resolve(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    if cfg.experiment == "gatecost_table":
        metrics, primary = run_gatecost(cfg, out)
    elif cfg.experiment == "head_to_head":
        metrics, primary = run_head_to_head(cfg, out)
    elif cfg.method == "vpr":
        metrics, primary = run_vpr(cfg, out)
    else:
        metrics, primary = run_hio(cfg, out)
    runtime = time.perf_counter() - t0
    write_json(out / "metrics.json", metrics)
    budget = _budget_of(cfg, metrics)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "config": cfg.to_dict(),
        "primary": primary,
        "budget": budget,
        "artifacts": sorted(p.name for p in out.iterdir() if p.is_file() and p.name not in ("manifest.json", "timing.json")),
    }
    write_json(out / "manifest.json", manifest)
    timing = {"runtime_seconds": runtime}
    write_json(out / "timing.json", timing)
    log.info("%s finished in %.1f s -> %s", cfg.experiment, runtime, out)
    return RunResult(out, _clean(manifest), _clean(metrics), timing)


def _budget_of(cfg: ExperimentConfig, metrics: dict):
    if cfg.experiment == "gatecost_table":
        return None
    if cfg.experiment == "head_to_head":
        return {"vpr": metrics["vpr"]["budget"]["R%d" % cfg.r_count], "hio": metrics["hio"]["budget"]}
    b = metrics.get("budget")
    if isinstance(b, dict):
        return b.get(f"R{cfg.r_count}") if cfg.r_compare is None else b
    return b


# ------------------------------------------------------------------- compare


def _load_side(manifest_path: Path) -> tuple[dict, np.ndarray, np.ndarray]:
    manifest = json.loads(Path(manifest_path).read_text())
    if manifest.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported manifest in {manifest_path}")
    base = Path(manifest_path).parent
    prim = manifest.get("primary", {})
    if "ideal" not in prim or "retrieved" not in prim:
        raise ConfigError("primary", f"{manifest_path} has no single ideal/retrieved spectrum pair")
    return manifest, read_spectrum(base / prim["ideal"]), read_spectrum(base / prim["retrieved"])


def compare(manifest_a: str | Path, manifest_b: str | Path, out_dir: str | Path | None = None) -> dict:
    """Side-by-side report of two runs on the same frequency grid."""
    ma, ia, ra = _load_side(Path(manifest_a))
    mb, ib, rb = _load_side(Path(manifest_b))
    if ia.shape != ib.shape:
        raise ConfigError("grid", f"spectrum lengths differ: {ia.shape[0]} vs {ib.shape[0]}")
    report = {"schema_version": SCHEMA_VERSION, "sides": {}}
    for name, man, ideal, rec in (("a", ma, ia, ra), ("b", mb, ib, rb)):
        report["sides"][name] = {
            "manifest": str(manifest_a if name == "a" else manifest_b),
            "method": man["config"].get("method"),
            "l1": dsp.spectrum_l1_error(rec, ideal),
            "peaks": peak_report(ideal, rec),
            "budget_NS": man.get("budget"),
        }
    _, rb_on_a = dsp.align_ambiguities(rb, ra)
    report["l1_difference"] = abs(report["sides"]["a"]["l1"] - report["sides"]["b"]["l1"])
    report["l1_between_retrieved"] = dsp.spectrum_l1_error(rb_on_a, ra)
    report["ideal_l1_between"] = dsp.spectrum_l1_error(ib, ia)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "compare.json", report)
        rows = [
            (k, float(abs(ia[k])), float(abs(ra[k])), float(abs(ib[k])), float(abs(rb_on_a[k])))
            for k in range(len(ia))
        ]
        write_csv(out / "compare_overlay.csv", ["k", "ideal_a", "retrieved_a", "ideal_b", "retrieved_b_aligned"], rows)
    return _clean(report)
