"""Long-time slope phi_k(t)/t of large configurations against a_k.

Integrates from c = (1, 0, ...) for each parameter cell and prints the
maximum relative error over k <= k_cut at several horizons.
"""
import argparse

import numpy as np

from pafluid.dynamics import InitialConfiguration, integrate_phi
from pafluid.equilibrium import solve
from pafluid.experiments import large_init_slope
from pafluid.params import ModelParams


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--horizons", default="10,100,1000")
    ap.add_argument("--k-cut", type=int, default=8)
    args = ap.parse_args()
    horizons = [float(h) for h in args.horizons.split(",")]
    init = InitialConfiguration(np.array([1.0]))
    print("model  p    kappa  " + "  ".join(f"t={h:g}".rjust(10) for h in horizons))
    for model in ("graph", "urn"):
        for p in (0.3, 0.7, 1.0):
            if model == "urn" and p == 1.0:
                continue
            for kappa in (-0.5, 0.0, 0.5):
                params = ModelParams.power(model, p, kappa)
                sol = solve(params)
                traj = integrate_phi(init, params, horizons[-1], t_eval=[0.0] + horizons)
                errs = []
                for i in range(1, len(horizons) + 1):
                    sub = type(traj)(traj.t[:i + 1], traj.X[:i + 1], traj.tail[:i + 1], traj.w)
                    errs.append(large_init_slope(sub, sol, args.k_cut).rel_error.max())
                print(f"{model:5s}  {p:3.1f}  {kappa:5.1f}  " + "  ".join(f"{e:10.2e}" for e in errs))


if __name__ == "__main__":
    main()
