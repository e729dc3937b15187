#!/usr/bin/env python3
"""Singular-value spectra of the frame families.

Writes one CSV per problem family into results/: the spectrum of A, of Z*,
and of the plunge operator (I - A Z*) A.
"""

import pathlib
import sys

from azls.cli import main

OUT = pathlib.Path(__file__).resolve().parent.parent / "results"

RUNS = [
    ("fourier1d", ["--problem", "fourier1d", "--n", "201"]),
    ("chebyshev", ["--problem", "chebyshev", "--n", "201"]),
    ("legendre", ["--problem", "legendre", "--n", "40"]),
    ("gram", ["--problem", "gram", "--n", "51",
              "--domain", "[[-0.75,-0.25],[0,0.5]]"]),
    ("fourier2d", ["--problem", "fourier2d", "--n", "9", "--mask", "disk"]),
]


def run():
    OUT.mkdir(exist_ok=True)
    for name, args in RUNS:
        out = OUT / f"spectrum-{name}.csv"
        code = main(["singvals", *args, "--out", str(out)])
        if code != 0:
            return code
        print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(run())
