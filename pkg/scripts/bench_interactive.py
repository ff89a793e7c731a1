#!/usr/bin/env python3
"""Interactivity benchmark: time table construction and every 2-variable
panel on the full-size synthetic survey.

Usage: python scripts/bench_interactive.py [--size 30000] [--seed 7]
"""

import argparse
import itertools
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from watson import synth
from watson.freqtable import build_table, marginalize
from watson.ingest import apply_codebook, infer_schema, parse_csv
from watson.plots import render_panel2
from watson.server import default_bar_var


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--size", type=int, default=30000)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    t0 = time.perf_counter()
    csv_text, codebook, _ = synth.synth_survey(args.size, args.seed)
    gen_s = time.perf_counter() - t0

    t0 = time.perf_counter()
    rs = parse_csv(csv_text)
    schema = apply_codebook(infer_schema(rs), codebook)
    table = build_table(rs, schema)
    build_s = time.perf_counter() - t0

    raw_cells = args.size * len(rs.column_names)
    print(f"records            {args.size}")
    print(f"generate           {gen_s:8.3f}s")
    print(f"parse+infer+build  {build_s:8.3f}s")
    print(f"tensor cells       {table.counts.size} "
          f"(raw cells {raw_cells}, compression x{raw_cells / table.counts.size:.1f})")
    print()
    print(f"{'panel':34s} {'seconds':>8s}")

    worst = 0.0
    for pair in itertools.combinations(table.names(), 2):
        t0 = time.perf_counter()
        sub = marginalize(table, list(pair))
        render_panel2(sub, default_bar_var(sub, list(pair)))
        panel_s = time.perf_counter() - t0
        worst = max(worst, panel_s)
        print(f"{'-'.join(pair):34s} {panel_s:8.3f}")
    print(f"\nworst panel {worst:.3f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
