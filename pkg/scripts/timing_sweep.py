#!/usr/bin/env python3
"""Wall-time scaling of the three-step solver against a dense direct solve.

The three-step solver with a randomized SVD in step 1 should scale roughly
like N log^2 N on the 1D Fourier extension, while the dense direct solver
scales cubically.  The direct sweep stops earlier because it becomes slow.
"""

import pathlib
import sys

from azls.cli import main

OUT = pathlib.Path(__file__).resolve().parent.parent / "results"

AZ_NS = ",".join(str(2**k + 1) for k in range(4, 13))
DIRECT_NS = ",".join(str(2**k - 1) for k in range(4, 12))


def run():
    OUT.mkdir(exist_ok=True)
    for name, solver, ns in [("az", "az-rand-svd", AZ_NS),
                             ("direct", "direct", DIRECT_NS)]:
        out = OUT / f"timing-{name}.csv"
        code = main(["timing", "--problem", "fourier1d", "--solver", solver,
                     "--n-list", ns, "--out", str(out)])
        if code != 0:
            return code
        print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(run())
