"""CNOT count and CNOT depth of ``k`` Trotter layers, with and without control.

The closed forms are the standard table values, evaluated in exact integer
arithmetic. "PR" (phase retrieval) means plain time evolution; "no PR" means
the controlled evolution needed by ancilla-based phase estimation.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass


class Model(str, enum.Enum):
    TFIM_1D = "tfim_1d"
    FH2D_SPINLESS = "fh2d_spinless"


class Hardware(str, enum.Enum):
    ALL_TO_ALL = "all_to_all"
    LINE_1D = "line_1d"
    GRID_2D = "grid_2d"


VALID = {
    (Model.TFIM_1D, Hardware.ALL_TO_ALL),
    (Model.TFIM_1D, Hardware.LINE_1D),
    (Model.FH2D_SPINLESS, Hardware.GRID_2D),
}


@dataclass(frozen=True)
class CostQuery:
    """``n`` is the qubit count (TFIM) or the lattice side (FH2D)."""

    model: Model
    hardware: Hardware
    n: int
    k: int
    use_pr: bool = True

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        object.__setattr__(self, "hardware", Hardware(self.hardware))
        if (self.model, self.hardware) not in VALID:
            raise ValueError(f"no cost formula for {self.model.value} on {self.hardware.value}")
        if self.n < 1 or self.k < 1:
            raise ValueError("n and k must be positive integers")

    def with_pr(self, use_pr: bool) -> "CostQuery":
        return CostQuery(self.model, self.hardware, self.n, self.k, use_pr)


@dataclass(frozen=True)
class CostResult:
    cnots: int
    depth: int


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def _ceil_log2(n: int) -> int:
    return (n - 1).bit_length()


def trotter_cost(q: CostQuery, fh_ghz_text_depth: bool = False) -> CostResult:
    """Exact table value for ``q``.

    ``fh_ghz_text_depth`` swaps the FH2D controlled-depth GHZ term ``3(n-2)``
    for the smaller ``ceil(3(n-2)/2)`` estimate quoted in the prose derivation.
    """
    n, k = q.n, q.k
    if q.model is Model.TFIM_1D:
        if q.use_pr:
            return CostResult((2 * n - 2) * k, 4 * k)
        if q.hardware is Hardware.ALL_TO_ALL:
            return CostResult((6 * n - 4) * k, 2 * _ceil_log2(n) + 10 * k)
        return CostResult(6 * (n - 1) + (6 * n - 4) * k, 6 * _ceil_div(n, 2) + 10 * k)
    pairs = n * (n - 1) // 2
    if q.use_pr:
        return CostResult(32 * k * pairs, 32 * k)
    ghz = _ceil_div(3 * (n - 2), 2) if fh_ghz_text_depth else 3 * (n - 2)
    return CostResult(48 * k * pairs + 6 * _ceil_div((n - 1) ** 2, 2), 48 * k + ghz)


def cnot_ratio(q_pr: CostQuery, q_ctl: CostQuery) -> float:
    """CNOT count of the controlled variant over that of the plain variant."""
    if (q_pr.model, q_pr.hardware, q_pr.n, q_pr.k) != (q_ctl.model, q_ctl.hardware, q_ctl.n, q_ctl.k):
        raise ValueError("queries must agree on model, hardware, n and k")
    if not q_pr.use_pr or q_ctl.use_pr:
        raise ValueError("first query must use phase retrieval, second must not")
    base = trotter_cost(q_pr).cnots
    if base == 0:
        raise ZeroDivisionError("phase-retrieval CNOT count is zero (n = 1)")
    return trotter_cost(q_ctl).cnots / base


def max_layers(q: CostQuery, depth_budget: int) -> int:
    """Largest ``k`` whose depth fits in ``depth_budget`` (0 if even one layer does not)."""
    k = 0
    while trotter_cost(CostQuery(q.model, q.hardware, q.n, k + 1, q.use_pr)).depth <= depth_budget:
        k += 1
    return k


TABLE_ROWS = [
    (Model.TFIM_1D, Hardware.ALL_TO_ALL),
    (Model.TFIM_1D, Hardware.LINE_1D),
    (Model.FH2D_SPINLESS, Hardware.GRID_2D),
]


def table_rows(n: int, k: int) -> list[dict]:
    """One record per table row: model, hardware, and both CNOT/depth pairs."""
    out = []
    for model, hw in TABLE_ROWS:
        pr = trotter_cost(CostQuery(model, hw, n, k, True))
        ctl = trotter_cost(CostQuery(model, hw, n, k, False))
        out.append(
            {
                "model": model.value,
                "hardware": hw.value,
                "n": n,
                "k": k,
                "cnots_pr": pr.cnots,
                "cnots_no_pr": ctl.cnots,
                "depth_pr": pr.depth,
                "depth_no_pr": ctl.depth,
            }
        )
    return out


def table_markdown(n: int, k: int) -> str:
    cols = ["model", "hardware", "cnots_pr", "cnots_no_pr", "depth_pr", "depth_no_pr"]
    lines = ["| " + " | ".join(cols) + " |", "|" + "---|" * len(cols)]
    for row in table_rows(n, k):
        lines.append("| " + " | ".join(str(row[c]) for c in cols) + " |")
    return "\n".join(lines)
