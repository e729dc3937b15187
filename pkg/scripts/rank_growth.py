#!/usr/bin/env python3
"""Epsilon-rank growth of the plunge operator (I - A Z*) A as N doubles.

The rank should grow at most logarithmically with N for the extension frames.
"""

import pathlib
import sys

from azls.cli import main

OUT = pathlib.Path(__file__).resolve().parent.parent / "results"

RUNS = [
    ("fourier1d", "51,101,201,401"),
    ("chebyshev", "51,101,201,401"),
    ("legendre", "20,40,80"),
]


def run():
    OUT.mkdir(exist_ok=True)
    for name, n_list in RUNS:
        out = OUT / f"rankgrowth-{name}.csv"
        code = main(["rankgrowth", "--problem", name, "--n-list", n_list,
                     "--out", str(out)])
        if code != 0:
            return code
        print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(run())
