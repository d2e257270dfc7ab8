"""Reference values of s* and a_1..a_5 in 40-digit arithmetic.

Independent of the package: the series is summed term by term with mpmath
until terms drop below 1e-45 and the root is found with the Illinois method
from a doubling/halving bracket.  The printed values are frozen in tests/test_oracles.py.
"""
import argparse

import mpmath as mp

CELLS = [
    ("graph", 0.5, 0.5),
    ("graph", 0.7, 0.0),
    ("graph", 0.3, -0.5),
    ("urn", 0.3, -0.5),
    ("urn", 0.5, 0.0),
    ("urn", 0.7, 0.5),
]


def rates(model, p):
    p = mp.mpf(str(p))
    return p, (2 - p if model == "graph" else 1 - p)


def F(s, model, p, kappa):
    p0, q0 = rates(model, p)
    total, prod, k = mp.mpf(0), mp.mpf(1), 1
    while True:
        wk = mp.mpf(k) ** kappa
        prod *= q0 * wk / (s + q0 * wk)
        total += prod
        if prod < mp.mpf(10) ** -45:
            break
        k += 1
    return p0 / q0 * total


def a_values(s, model, p, kappa, K=5):
    p0, q0 = rates(model, p)
    out, prod = [], mp.mpf(1)
    for k in range(1, K + 1):
        wk = mp.mpf(k) ** kappa
        prod *= q0 * wk / (s + q0 * wk)
        out.append(p0 * s / q0 * prod / wk)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dps", type=int, default=40)
    args = ap.parse_args()
    mp.mp.dps = args.dps
    for model, p, kappa in CELLS:
        kap = mp.mpf(kappa)
        g = lambda x: F(x, model, p, kap) - 1  # noqa: E731
        lo = hi = mp.mpf(1)
        while g(hi) > 0:
            hi *= 2
        while g(lo) < 0:
            lo /= 2
        s = mp.findroot(g, (lo, hi), solver="illinois", tol=mp.mpf(10) ** -60)
        a = a_values(s, model, p, kap)
        print(f'("{model}", {p}, {kappa}): ({mp.nstr(s, 20)}, [{", ".join(mp.nstr(x, 20) for x in a)}]),')


if __name__ == "__main__":
    main()
