"""Run the verification sweep and both case studies with the committed configs.

    python3 scripts/run_experiments.py [--out results] [--workers N] [--only verify,case1,case2]

Each step is a plain ``bvlab`` invocation, so the same outputs can be had from
the command line.  Exits non-zero if any step does.
"""
import argparse
import sys
import time
from pathlib import Path

from bvlab.cli import main as bvlab

ROOT = Path(__file__).resolve().parent.parent
STEPS = ("verify", "case1", "case2")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=ROOT / "results")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--only", default=",".join(STEPS))
    args = ap.parse_args()
    steps = [s for s in args.only.split(",") if s]
    unknown = set(steps) - set(STEPS)
    if unknown:
        ap.error(f"unknown steps {sorted(unknown)}")

    worst = 0
    for step in steps:
        argv = [step, "--out", str(args.out / step)]
        if step != "verify":
            argv += ["--config", str(ROOT / "configs" / f"{step}.json"),
                     "--dataset", str(ROOT / "data" / "segment_surrogate.csv"),
                     "--workers", str(args.workers)]
        print(f"== bvlab {' '.join(argv)}")
        t0 = time.perf_counter()
        rc = bvlab(argv)
        print(f"== exit {rc} after {time.perf_counter() - t0:.1f}s\n")
        worst = max(worst, rc)
    return worst


if __name__ == "__main__":
    sys.exit(main())
