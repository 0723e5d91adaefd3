"""Command line entry point: ``specfree run|compare|gatecost``.

Exit status is 0 on success, 2 on a validation error (bad config or
arguments) and 3 when a system exceeds the desk-scale dimension cap.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

from specfree import experiments, gatecost, simcore

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DESK_SCALE = 3


def _cmd_run(args) -> int:
    cfg = experiments.load_config(args.config)
    if args.output_dir:
        cfg.output_dir = args.output_dir
    result = experiments.run(cfg)
    print(f"wrote {len(result.manifest['artifacts'])} artifacts to {result.output_dir}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    report = experiments.compare(args.manifest_a, args.manifest_b, args.output_dir)
    for name in ("a", "b"):
        side = report["sides"][name]
        print(f"{name}: method={side['method']} l1={side['l1']:.6g} N_S={side['budget_NS']} "
              f"peaks_matched={side['peaks']['all_matched']}")
    print(f"|l1_a - l1_b| = {report['l1_difference']:.6g}")
    return EXIT_OK


def _cmd_gatecost(args) -> int:
    if args.model is None and args.hardware is None:
        rows = gatecost.table_rows(args.n, args.k)
        if args.format == "markdown":
            print(gatecost.table_markdown(args.n, args.k))
            return EXIT_OK
    else:
        if args.model is None or args.hardware is None:
            raise experiments.ConfigError("model" if args.model is None else "hardware", "give both or neither")
        q = gatecost.CostQuery(args.model, args.hardware, args.n, args.k)
        pr = gatecost.trotter_cost(q)
        ctl = gatecost.trotter_cost(q.with_pr(False), fh_ghz_text_depth=args.ghz_text_depth)
        rows = [{"model": q.model.value, "hardware": q.hardware.value, "n": q.n, "k": q.k,
                 "cnots_pr": pr.cnots, "cnots_no_pr": ctl.cnots, "depth_pr": pr.depth, "depth_no_pr": ctl.depth}]
    if args.format == "csv":
        w = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    elif args.format == "json":
        print(json.dumps(rows, indent=2))
    else:
        cols = list(rows[0])
        print("| " + " | ".join(cols) + " |")
        print("|" + "---|" * len(cols))
        for r in rows:
            print("| " + " | ".join(str(r[c]) for c in cols) + " |")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="specfree", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment from a JSON config or manifest")
    r.add_argument("config")
    r.add_argument("--output-dir", default=None, help="override the config's output_dir")
    r.set_defaults(func=_cmd_run)

    c = sub.add_parser("compare", help="compare two runs given their manifests")
    c.add_argument("manifest_a")
    c.add_argument("manifest_b")
    c.add_argument("--output-dir", default=None, help="write compare.json and the overlay CSV here")
    c.set_defaults(func=_cmd_compare)

    g = sub.add_parser("gatecost", help="CNOT count and depth with and without phase retrieval")
    g.add_argument("--model", choices=[m.value for m in gatecost.Model])
    g.add_argument("--hardware", choices=[h.value for h in gatecost.Hardware])
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--format", choices=["markdown", "csv", "json"], default="markdown")
    g.add_argument("--ghz-text-depth", action="store_true",
                   help="use the ceil(3(n-2)/2) GHZ depth estimate for the controlled FH2D depth")
    g.set_defaults(func=_cmd_gatecost)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except simcore.DeskScaleExceeded as exc:
        print(f"error: desk-scale cap exceeded: {exc}", file=sys.stderr)
        return EXIT_DESK_SCALE
    except (experiments.ConfigError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
