#!/usr/bin/env python3
"""Generate data/basic_terms.model.json, a small synthetic color-term model.

Bins are a 9-level sRGB grid (729 colors). Each term has a prototype color and
a bin's count for a term decays with the CIEDE2000 distance to the prototype,
so nearby colors share names the way survey data tends to.
"""
import argparse
import json
import math

import numpy as np
from skimage.color import deltaE_ciede2000, rgb2lab

LEVELS = [0, 32, 64, 96, 128, 160, 192, 224, 255]

PROTOTYPES = {
    "red": (220, 20, 30),
    "orange": (245, 130, 20),
    "yellow": (250, 225, 40),
    "green": (40, 160, 60),
    "blue": (30, 80, 200),
    "purple": (120, 50, 160),
    "pink": (245, 150, 190),
    "brown": (130, 80, 40),
    "grey": (128, 128, 128),
    "black": (20, 20, 20),
    "white": (245, 245, 245),
    "teal": (0, 140, 140),
}

SPREAD = 15.0


def to_lab(rgb):
    arr = np.asarray(rgb, dtype=float).reshape(-1, 1, 3) / 255.0
    return rgb2lab(arr).reshape(-1, 3)


def build():
    grid = [(r, g, b) for r in LEVELS for g in LEVELS for b in LEVELS]
    bins = to_lab(grid)
    terms = list(PROTOTYPES)
    protos = to_lab([PROTOTYPES[t] for t in terms])
    counts = []
    for i, lab in enumerate(bins):
        d = deltaE_ciede2000(np.repeat(lab[None, :], len(terms), axis=0), protos)
        row = [int(round(100.0 * math.exp(-(x * x) / (2.0 * SPREAD * SPREAD)))) for x in d]
        nearest = int(np.argmin(d))
        row[nearest] = max(row[nearest], 1)
        counts.extend([i, t, c] for t, c in enumerate(row) if c > 0)
    return {
        "format": "blendopt-name-model",
        "version": 1,
        "bins": [round(float(v), 6) for v in bins.reshape(-1)],
        "terms": terms,
        "counts": counts,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data/basic_terms.model.json")
    args = ap.parse_args()
    with open(args.out, "w") as fh:
        json.dump(build(), fh, separators=(",", ":"))
        fh.write("\n")


if __name__ == "__main__":
    main()
