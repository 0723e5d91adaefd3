#!/usr/bin/env python3
"""Run one or more recipes and print a short summary per run.

Usage::

    python scripts/run_experiments.py                 # every recipe
    python scripts/run_experiments.py hio_2x2 head_to_head
    python scripts/run_experiments.py --out runs vpr_noiseless_support

Artifacts go to ``<out>/<experiment>``; each directory holds a manifest that
``specfree run <dir>/manifest.json`` reproduces byte for byte.
"""
from __future__ import annotations

import argparse
import logging

from specfree import experiments

ORDER = ["gatecost_table", "vpr_noiseless_support", "hio_2x2", "hio_2x2_shots", "head_to_head", "vpr_r_resilience"]


def summarize(name: str, res: experiments.RunResult) -> str:
    m = res.metrics
    if name == "gatecost_table":
        return "; ".join(f"{r['model']}/{r['hardware']}: {r['cnots_pr']} vs {r['cnots_no_pr']} CNOTs" for r in m["rows"])
    if name == "head_to_head":
        a, b = m["compare"]["sides"]["a"], m["compare"]["sides"]["b"]
        return f"VPR l1 {a['l1']:.4f} (N_S {a['budget_NS']}), HIO l1 {b['l1']:.4f} (N_S {b['budget_NS']})"
    if "l1" in m:
        return f"l1 {m['l1']:.4f}, all ideal peaks matched: {m['peaks']['all_matched']}"
    parts = []
    for key, rec in sorted(m.items()):
        if isinstance(rec, dict) and "unrounded" in rec:
            parts.append(f"{key}: s*={rec['s_star']} l1={rec['unrounded']['l1']:.3f}/{rec['rounded']['l1']:.3f}")
    return "; ".join(parts)


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("recipes", nargs="*", default=ORDER, metavar="RECIPE")
    p.add_argument("--out", default="runs")
    p.add_argument("-v", "--verbose", action="store_true")
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    for name in args.recipes or ORDER:
        extra = {"shots": 1000} if name == "hio_2x2_shots" else {}
        experiment = "hio_2x2" if name == "hio_2x2_shots" else name
        cfg = experiments.ExperimentConfig.from_dict({"experiment": experiment, "output_dir": f"{args.out}/{name}", **extra})
        res = experiments.run(cfg)
        print(f"{name}: {summarize(name, res)}  [{res.timing['runtime_seconds']:.1f} s]")


if __name__ == "__main__":
    main()
