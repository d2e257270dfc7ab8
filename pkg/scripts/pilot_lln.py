"""Pilot Monte-Carlo runs for the law-of-large-numbers checks.

Writes tests/golden/lln_pilot.json: per-configuration deviation summaries
at each n, with the seeds used.  Re-running must reproduce the file.
"""
import argparse
import json
import time
from pathlib import Path

from pafluid.experiments import convergence_study
from pafluid.params import ModelParams

CONFIGS = {
    "graph_p1_k0.5": ("graph", 1.0, 0.5),
    "urn_p0.5_k0": ("urn", 0.5, 0.0),
    "graph_p1_k0": ("graph", 1.0, 0.0),
}


def pilot(seed: int, replicas: int, ns, k_cut: int) -> dict:
    out = {}
    for name, (model, p, kappa) in CONFIGS.items():
        t = time.perf_counter()
        table = convergence_study(ModelParams.power(model, p, kappa), ns, replicas, T=1.0,
                                  k_cut=k_cut, seed=seed)
        d = table.to_dict()
        d["config"] = {"model": model, "p": p, "kappa": kappa, "seed": seed, "replicas": replicas,
                       "k_cut": k_cut, "T": 1.0, "grid_points": 101}
        d["wall_clock"] = round(time.perf_counter() - t, 3)
        out[name] = d
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--replicas", type=int, default=20)
    ap.add_argument("--ns", default="1000,10000,100000")
    ap.add_argument("--k-cut", type=int, default=5)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "tests" / "golden" / "lln_pilot.json"))
    args = ap.parse_args()
    ns = [int(float(x)) for x in args.ns.split(",")]
    res = pilot(args.seed, args.replicas, ns, args.k_cut)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w") as fh:
        json.dump(res, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for name, d in res.items():
        means = [s["mean"] for s in d["summaries"]]
        print(f"{name}: means={['%.5f' % m for m in means]} slope={d['slope']:.3f} in_band={d['slope_in_band']}")


if __name__ == "__main__":
    main()
