#!/usr/bin/env python3
"""Convert the Japanese Vowels .ts archive files into fiver feature files.

Usage: convert_japvow.py JapaneseVowels_TRAIN.ts JapaneseVowels_TEST.ts OUT_DIR

Each utterance becomes one CSV (one 12-d LPC frame per row) and one manifest
record. The published train/test split is kept via the split tag.
"""
import os
import sys


def read_ts(path):
    in_data = False
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line.lower().startswith("@data"):
                in_data = True
                continue
            if line.startswith("@") or not in_data:
                continue
            *dims, label = line.split(":")
            series = [[float(v) for v in d.split(",") if v not in ("", "?", "NaN")] for d in dims]
            length = min(len(s) for s in series)
            frames = [[s[t] for s in series] for t in range(length)]
            yield frames, label.strip()


def main():
    if len(sys.argv) != 4:
        sys.exit(__doc__)
    train, test, out = sys.argv[1:]
    records = []
    for split, path in (("train", train), ("test", test)):
        os.makedirs(os.path.join(out, split), exist_ok=True)
        for n, (frames, label) in enumerate(read_ts(path)):
            rel = f"{split}/{n:04d}.csv"
            with open(os.path.join(out, rel), "w") as f:
                f.write("# fiver-features 1\n")
                for row in frames:
                    f.write(",".join(repr(v) for v in row) + "\n")
            records.append((rel, label, split))
    with open(os.path.join(out, "manifest.txt"), "w") as f:
        f.write("fiver-manifest 1\n")
        f.write("dim 12\n")
        for rel, label, split in records:
            f.write(f"{rel},{label},{split}\n")


if __name__ == "__main__":
    main()
