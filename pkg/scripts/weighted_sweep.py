#!/usr/bin/env python3
"""Weight-threshold sweep for the weighted least-squares variant.

The target has a jump at x = 0.5 and the weight w(x) = (x - 0.5)^2 vanishes
there, so small thresholds reproduce the unweighted (Gibbs-afflicted)
solution while large ones enforce the weighted fit everywhere.
"""

import pathlib
import sys

from azls.cli import main

OUT = pathlib.Path(__file__).resolve().parent.parent / "results"


def run():
    OUT.mkdir(exist_ok=True)
    out = OUT / "weighted-sweep.csv"
    code = main(["weighted", "--n", "121",
                 "--eps-w-list", "0,1e-6,1e-5,1e-4,1e-3,1e-2,1e-1,1,10",
                 "--out", str(out)])
    if code == 0:
        print(f"wrote {out}")
    return code


if __name__ == "__main__":
    sys.exit(run())
