"""Regenerate data/segment_surrogate.csv, the committed 7-class stand-in dataset.

    python3 scripts/make_surrogate.py [--seed 0] [--out data/segment_surrogate.csv]
"""
import argparse
from pathlib import Path

from bvlab.learners import SEGMENT_FEATURES, synthetic_segmentation, write_dataset_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data" / "segment_surrogate.csv")
    args = ap.parse_args()
    X, y, split, names = synthetic_segmentation(args.seed)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_dataset_csv(args.out, X, y, split, names, SEGMENT_FEATURES)
    print(f"wrote {len(y)} rows ({(split == 'train').sum()} train) to {args.out}")


if __name__ == "__main__":
    main()
