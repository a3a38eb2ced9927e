#!/usr/bin/env python3
"""Pick the scripted-demo count that puts the base policy in a target success band.

For each candidate count, runs `batchlab run` for every seed with a single cheap
iteration and reads the iteration-0 row of metrics.jsonl, which evaluates the
policy trained on the demos alone. Prints a table and the smallest count whose
mean lands in the band. Exits 1 if none does.

    tools/calibrate_demos.py --cli build/tools/batchlab --env TwoCorridors \
        --demos 3 4 6 8 --seeds 0 1 2 --fast
"""

import argparse
import json
import statistics
import subprocess
import sys
import tempfile
from pathlib import Path


def base_return(cli, doc, seed, fast, work):
    config = work / f"demos{doc['demos']}.json"
    config.write_text(json.dumps(doc))
    out = work / f"demos{doc['demos']}_seed{seed}"
    cmd = [cli, "run", "--config", str(config), "--seed", str(seed), "--out", str(out)]
    if fast:
        cmd.append("--fast")
    subprocess.run(cmd, check=True, stdout=subprocess.DEVNULL)
    with open(out / "metrics.jsonl") as f:
        first = json.loads(f.readline())
    assert first["iteration"] == 0
    return first["return_mean"]


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--cli", default="build/tools/batchlab")
    p.add_argument("--env", required=True)
    p.add_argument("--algorithm", default="il", help="only the base policy is read, so il is cheapest")
    p.add_argument("--demos", type=int, nargs="+", required=True)
    p.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    p.add_argument("--band", type=float, nargs=2, default=[0.30, 0.65])
    p.add_argument("--params", default="{}", help="extra config keys as JSON, merged into every run")
    p.add_argument("--fast", action="store_true")
    p.add_argument("--work", help="keep run directories here instead of a temp dir")
    args = p.parse_args()

    lo, hi = args.band
    extra = json.loads(args.params)
    with tempfile.TemporaryDirectory() as tmp:
        work = Path(args.work or tmp)
        work.mkdir(parents=True, exist_ok=True)
        chosen = None
        print(f"{'demos':>5}  {'mean':>6}  per-seed")
        for n in args.demos:
            doc = {"env": args.env, "algorithm": args.algorithm, "iterations": 1,
                   "rollouts_per_iteration": 1, "demos": n, **extra}
            returns = [base_return(args.cli, doc, s, args.fast, work) for s in args.seeds]
            mean = statistics.fmean(returns)
            inside = lo <= mean <= hi
            print(f"{n:>5}  {mean:6.3f}  {' '.join(f'{r:.2f}' for r in returns)}{'  *' if inside else ''}")
            if inside and chosen is None:
                chosen = n
    if chosen is None:
        print(f"no demo count puts the mean in [{lo}, {hi}]", file=sys.stderr)
        return 1
    print(f"chosen: {chosen}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
