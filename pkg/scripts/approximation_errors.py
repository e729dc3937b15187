#!/usr/bin/env python3
"""Approximation errors of the frame families on smooth and non-smooth
targets, solved with the three-step algorithm."""

import pathlib
import sys

from azls.cli import main

OUT = pathlib.Path(__file__).resolve().parent.parent / "results"

RUNS = [
    ("fourier1d-exp", ["--problem", "fourier1d", "--n", "201",
                       "--function", "exp"]),
    ("chebyshev-exp", ["--problem", "chebyshev", "--n", "64",
                       "--function", "exp"]),
    ("legendre-exp", ["--problem", "legendre", "--n", "40",
                      "--function", "exp"]),
    ("sumframe-singular", ["--problem", "sumframe", "--n", "32",
                           "--function", "singular"]),
    ("fourier2d-disk", ["--problem", "fourier2d", "--n", "9",
                        "--mask", "disk", "--function", "exp"]),
]


def run():
    OUT.mkdir(exist_ok=True)
    for name, args in RUNS:
        out = OUT / f"approx-{name}.csv"
        code = main(["approx", *args, "--out", str(out)])
        if code != 0:
            return code
        print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(run())
