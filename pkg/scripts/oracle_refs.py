"""Regenerate tests/data/oracle_refs.json: p^(alpha)(1, r, s) from the mpmath
Zolotarev subordination integral (minutes per point)."""

import argparse
import json
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from oracles import p_alpha_mp  # noqa: E402

POINTS = [(0.5, 1.5, 2.0, 0.3), (-0.4, 0.5, 1.0, 1.0), (1.0, 1.2, 0.4, 3.0), (3.0, 0.8, 5.0, 0.05)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--output", default=str(ROOT / "tests" / "data" / "oracle_refs.json"))
    args = ap.parse_args()
    rows = []
    for zeta, alpha, r, s in POINTS:
        v = p_alpha_mp(zeta, alpha, 1.0, r, s)
        rows.append({"zeta": zeta, "alpha": alpha, "t": 1.0, "r": r, "s": s, "value": str(v)})
        print(rows[-1], flush=True)
    pathlib.Path(args.output).parent.mkdir(exist_ok=True)
    with open(args.output, "w") as fh:
        json.dump({"dps": 25, "points": rows}, fh, indent=1)


if __name__ == "__main__":
    main()
