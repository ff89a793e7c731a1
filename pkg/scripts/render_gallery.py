#!/usr/bin/env python3
"""Produce a browsable gallery: synthetic survey + full plot library +
questions for the planted-gradient pair, under an output directory.

Usage: python scripts/render_gallery.py [--out gallery] [--size 5000]
"""

import argparse
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="gallery")
    parser.add_argument("--size", type=int, default=5000)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    out = Path(args.out)
    data = out / "data"
    plots = out / "plots"
    env_cmd = [sys.executable, "-m", "watson"]
    env = {"PYTHONPATH": str(ROOT / "src")}
    import os

    env = {**os.environ, **env}

    def run(*cli):
        res = subprocess.run([*env_cmd, *cli], env=env, text=True,
                             capture_output=True)
        sys.stdout.write(res.stdout)
        sys.stderr.write(res.stderr)
        if res.returncode:
            raise SystemExit(res.returncode)
        return res.stdout

    run("synth", "--kind", "survey", "--size", str(args.size),
        "--seed", str(args.seed), "--out", str(data))
    run("plots", "--data", str(data / "survey.csv"),
        "--codebook", str(data / "survey_codebook.json"), "--out", str(plots))
    run("plots", "--data", str(data / "survey.csv"),
        "--codebook", str(data / "survey_codebook.json"), "--out", str(plots),
        "--vars", "department,choice_rank,residence")
    questions = run("questions", "--data", str(data / "survey.csv"),
                    "--codebook", str(data / "survey_codebook.json"),
                    "--vars", "department,choice_rank", "--bar", "department")
    (out / "questions.json").write_text(questions)

    files = sorted(p.name for p in plots.glob("*.svg"))
    index = "\n".join(
        f'<h3>{name}</h3><img src="plots/{name}" alt="{name}">' for name in files
    )
    (out / "index.html").write_text(
        "<!doctype html><meta charset='utf-8'><title>watson gallery</title>"
        f"<body style='font-family:sans-serif'>{index}</body>"
    )
    print(f"gallery written to {out}/index.html ({len(files)} plots)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
