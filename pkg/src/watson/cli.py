"""Command-line front end: build tables, emit the plot library, generate
questions, run recommendations, serve the API, and create synthetic data.

Manifest lines go to stdout; diagnostics go to stderr; the process exits
nonzero (printing the error code name) on any failure.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
import time

from . import freqtable as ft
from . import synth
from .errors import WatsonError
from .ingest import apply_codebook, infer_schema, load_codebook, parse_csv
from .knn import load_cohort, parse_feature_schema, patient_from_json, recommend
from .plots import PlotOptions, PlotSpec, render_bar1, render_multipanel3, render_panel2
from .questions import generate_questions
from .server import default_bar_var, run as run_server


def _load_table(data_path: str, codebook_path: str | None):
    with open(data_path, "rb") as fh:
        rs = parse_csv(fh.read())
    schema = infer_schema(rs)
    if codebook_path:
        with open(codebook_path, encoding="utf-8") as fh:
            schema = apply_codebook(schema, load_codebook(fh.read()))
    return ft.build_table(rs, schema)


def _atomic_write(path: str, data: str | bytes) -> None:
    mode = "wb" if isinstance(data, bytes) else "w"
    tmp = path + ".tmp"
    with open(tmp, mode) as fh:
        fh.write(data)
    os.replace(tmp, path)


def _plot_name(dataset: str, names: list[str], kind: str) -> str:
    return f"{dataset}_{'-'.join(names)}_{kind}.svg"


def cmd_build(args) -> int:
    table = _load_table(args.data, args.codebook)
    _atomic_write(args.out, json.dumps(table.to_json()))
    print(f"{args.out}\ttotal={table.total}\tcells={table.counts.size}")
    return 0


def cmd_plots(args) -> int:
    table = _load_table(args.data, args.codebook)
    os.makedirs(args.out, exist_ok=True)
    dataset = os.path.splitext(os.path.basename(args.data))[0]
    options = PlotOptions(show_scales=not args.no_scales)

    jobs: list[tuple[list[str], str]] = []
    if args.vars:
        names = [v.strip() for v in args.vars.split(",") if v.strip()]
        if not (1 <= len(names) <= 3):
            print("error: InvalidRequest: --vars must list 1 to 3 names", file=sys.stderr)
            return 1
        kind = {1: "bar1", 2: "panel2", 3: "multipanel3"}[len(names)]
        jobs.append((names, kind))
    else:
        all_names = list(table.names())
        for name in all_names:
            jobs.append(([name], "bar1"))
        for pair in itertools.combinations(all_names, 2):
            jobs.append((list(pair), "panel2"))

    for names, kind in jobs:
        start = time.perf_counter()
        sub = ft.marginalize(table, names)
        spec = PlotSpec(kind=kind, variables=tuple(names), options=options)
        if kind == "bar1":
            doc = render_bar1(sub, spec)
        elif kind == "panel2":
            bar = args.bar or default_bar_var(sub, names)
            doc = render_panel2(sub, bar, spec)
        else:
            panel = args.panel or names[2]
            rest = [n for n in names if n != panel]
            bar = args.bar or default_bar_var(sub, rest)
            color = next(n for n in names if n not in (panel, bar))
            doc = render_multipanel3(sub, bar, color, panel, spec)
        out_path = os.path.join(args.out, _plot_name(dataset, names, kind))
        _atomic_write(out_path, doc.xml)
        elapsed = time.perf_counter() - start
        print(f"{out_path}\t{','.join(names)}\t{elapsed:.3f}s")
    return 0


def cmd_questions(args) -> int:
    table = _load_table(args.data, args.codebook)
    names = [v.strip() for v in args.vars.split(",") if v.strip()]
    if len(names) != 2:
        print("error: InvalidRequest: --vars must list exactly 2 names", file=sys.stderr)
        return 1
    sub = ft.marginalize(table, names)
    bar = args.bar or default_bar_var(sub, names)
    qs = generate_questions(sub, bar, max_q=args.max_q)
    print(json.dumps({"questions": [q.to_json() for q in qs]}, indent=2))
    return 0


def cmd_recommend(args) -> int:
    with open(args.cohort, "rb") as fh:
        rs = parse_csv(fh.read())
    with open(args.schema, encoding="utf-8") as fh:
        schema, direction = parse_feature_schema(fh.read())
    cohort = load_cohort(rs, schema)
    with open(args.patient, encoding="utf-8") as fh:
        patient = patient_from_json(fh.read(), cohort.schema)
    rec = recommend(
        cohort, patient, k=args.k, k_min=args.k_min,
        direction=args.direction or direction,
    )
    print(json.dumps(rec.to_json(), indent=2))
    return 0


def cmd_serve(args) -> int:
    run_server(
        host=args.host, port=args.port, ui_dir=args.ui,
        data_dir=args.data_dir, verbose=not args.quiet,
    )
    return 0


def cmd_synth(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    if args.kind == "survey":
        csv_text, codebook, truth = synth.synth_survey(args.size, args.seed)
        files = {
            "survey.csv": csv_text,
            "survey_codebook.json": json.dumps(codebook, indent=2) + "\n",
            "survey_truth.json": json.dumps(truth, indent=2) + "\n",
        }
    elif args.kind == "cohort":
        csv_text, schema, truth = synth.synth_cohort(args.size, args.seed)
        files = {
            "cohort.csv": csv_text,
            "cohort_schema.json": json.dumps(schema, indent=2) + "\n",
            "cohort_truth.json": json.dumps(truth, indent=2) + "\n",
        }
    else:
        print(f"error: InvalidRequest: unknown kind {args.kind!r}", file=sys.stderr)
        return 1
    for name, text in files.items():
        path = os.path.join(args.out, name)
        _atomic_write(path, text)
        print(f"{path}\t{len(text)} bytes")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="watson")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a frequency table and save it as JSON")
    p.add_argument("--data", required=True)
    p.add_argument("--codebook")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("plots", help="emit the plot library (or one chosen plot)")
    p.add_argument("--data", required=True)
    p.add_argument("--codebook")
    p.add_argument("--out", required=True)
    p.add_argument("--vars", help="comma-separated variables (1-3); default: full library")
    p.add_argument("--bar", help="bar variable override")
    p.add_argument("--panel", help="panel variable override (3-variable plots)")
    p.add_argument("--no-scales", action="store_true")
    p.set_defaults(func=cmd_plots)

    p = sub.add_parser("questions", help="print leading questions for a variable pair")
    p.add_argument("--data", required=True)
    p.add_argument("--codebook")
    p.add_argument("--vars", required=True)
    p.add_argument("--bar")
    p.add_argument("--max-q", type=int, default=5)
    p.set_defaults(func=cmd_questions)

    p = sub.add_parser("recommend", help="per-therapy outcome prediction for one patient")
    p.add_argument("--cohort", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--patient", required=True)
    p.add_argument("--k", type=int, default=30)
    p.add_argument("--k-min", type=int, default=5)
    p.add_argument("--direction", choices=("lower", "higher"))
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--ui", help="directory of static UI files to serve at /")
    p.add_argument("--data-dir", help="snapshot directory (or WATSON_DATA_DIR)")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("synth", help="write deterministic synthetic data")
    p.add_argument("--kind", required=True)
    p.add_argument("--size", type=int, default=30000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except WatsonError as exc:
        print(f"error: {exc.code}: {exc.message}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: OSError: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
