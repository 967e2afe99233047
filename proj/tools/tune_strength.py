#!/usr/bin/env python3
"""Pick the regularization strength of EWC, SI and LwF.

For each method, every grid value is run over all four scenarios on a tuning
seed. The chosen value has the highest mean final average performance among
values whose mean stability satisfies the forgetting bound (S >= -epsilon);
when none do, the most stable value wins.

    tools/tune_strength.py --driftids build/tools/driftids \
        --config configs/desk_experiment.json --seed 7 --out tuning
"""

import argparse
import json
import pathlib
import subprocess
import sys

GRIDS = {
    "ewc": ("lambda", [1.0, 10.0, 100.0, 1000.0, 10000.0]),
    "si": ("c", [0.5, 5.0, 50.0, 500.0, 5000.0]),
    "lwf": ("weight", [0.1, 1.0, 10.0, 100.0]),
}
SCENARIOS = ["random", "b2w", "w2b", "toggle"]


def run(driftids, base, method, key, value, scenario, seed, out):
    cfg = dict(base)
    cfg.update(strategy=method, scenario=scenario, seed=seed, hyperparameters={key: value})
    tag = f"{method}_{key}{value:g}"
    cfg_path = out / f"{tag}_{scenario}.json"
    cfg_path.write_text(json.dumps(cfg, indent=2))
    rec_out = out / tag
    subprocess.run([driftids, "run", "--config", str(cfg_path), "--out", str(rec_out)],
                   check=True, stdout=subprocess.DEVNULL)
    metrics = json.loads((rec_out / "records" / f"{method}_{scenario}" / f"seed{seed}" / "metrics.json").read_text())
    return metrics["stability"], metrics["average_performance"][metrics["metric"]]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--driftids", required=True)
    ap.add_argument("--config", required=True, help="experiment config used as the base")
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--epsilon", type=float, default=0.1)
    ap.add_argument("--methods", nargs="*", default=list(GRIDS))
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    base = json.loads(pathlib.Path(args.config).read_text())
    result = {}
    for method in args.methods:
        key, grid = GRIDS[method]
        rows = []
        for value in grid:
            runs = [run(args.driftids, base, method, key, value, sc, args.seed, out) for sc in SCENARIOS]
            s = sum(r[0] for r in runs) / len(runs)
            a = sum(r[1] for r in runs) / len(runs)
            rows.append({"value": value, "stability": s, "average_performance": a})
            print(f"{method} {key}={value:g}: S={s:.3f} A={a:.3f}", file=sys.stderr)
        feasible = [r for r in rows if r["stability"] >= -args.epsilon]
        best = (max(feasible, key=lambda r: r["average_performance"]) if feasible
                else max(rows, key=lambda r: r["stability"]))
        result[method] = {"key": key, "chosen": best["value"], "grid": rows}
        print(f"{method}: {key}={best['value']:g}", file=sys.stderr)
    (out / "tuning.json").write_text(json.dumps(result, indent=2) + "\n")
    print(json.dumps({m: {r["key"]: r["chosen"]} for m, r in result.items()}))


if __name__ == "__main__":
    main()
