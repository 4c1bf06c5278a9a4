"""Run the acceptance suite and write a JSON summary."""
from __future__ import annotations

import argparse
import json

from thetadet.acceptance import CRITERIA, run_all

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--only", type=lambda s: [int(x) for x in s.split(",")], default=sorted(CRITERIA))
    p.add_argument("--out", default=None)
    args = p.parse_args()
    results = run_all(args.seed, args.only, echo=print)
    doc = {"seed": args.seed, "passed": all(r.passed for r in results), "criteria": [r.to_json() for r in results]}
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
    raise SystemExit(0 if doc["passed"] else 2)
