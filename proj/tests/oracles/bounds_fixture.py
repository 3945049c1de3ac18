#!/usr/bin/env python3
"""Writes tests/fixtures/bounds_reference.csv: 50 random inputs per bound
formula with values evaluated in extended precision (mpmath)."""
import csv
import pathlib
import random

import mpmath as mp

mp.mp.dps = 40
HERE = pathlib.Path(__file__).resolve().parent


def zeta_vc(n, d_vc, delta, b):
    n, d_vc, delta, b = map(mp.mpf, (n, d_vc, delta, b))
    return b * mp.sqrt((1 / n) * (1 + mp.log(4) + d_vc * mp.log(2 * n) - mp.log(delta)))


def zeta_rademacher(n, r_n, delta, b):
    n, r_n, delta, b = map(mp.mpf, (n, r_n, delta, b))
    return 2 * b * r_n + b * mp.sqrt(mp.log(1 / delta) / (2 * n))


def multiplier_bound(b, xi):
    return mp.mpf(b) / mp.mpf(xi)


def gap(zetas, delta_cap, m, nu):
    return (1 + mp.mpf(delta_cap)) * (mp.mpf(m) * mp.mpf(nu) + max(mp.mpf(z) for z in zetas))


def main():
    rng = random.Random(20240611)
    rows = []
    for i in range(50):
        n = rng.randint(1, 100000)
        d_vc = round(rng.uniform(0, 50), 3)
        delta = round(rng.uniform(1e-4, 0.999), 6)
        b = round(rng.uniform(0.1, 20), 4)
        r_n = round(rng.uniform(0, 2), 6)
        xi = round(rng.uniform(1e-3, 5), 6)
        zetas = [round(rng.uniform(0, 1), 6) for _ in range(3)]
        big_m = round(rng.uniform(0, 10), 5)
        nu = round(rng.uniform(0, 0.5), 6)
        delta_cap = round(rng.uniform(0, 100), 5)
        rows.append({
            "n": n, "d_vc": repr(d_vc), "delta": repr(delta), "B": repr(b),
            "R_N": repr(r_n), "xi": repr(xi),
            "zeta1": repr(zetas[0]), "zeta2": repr(zetas[1]), "zeta3": repr(zetas[2]),
            "M": repr(big_m), "nu": repr(nu), "Delta": repr(delta_cap),
            "zeta_vc": mp.nstr(zeta_vc(n, d_vc, delta, b), 25),
            "zeta_rademacher": mp.nstr(zeta_rademacher(n, r_n, delta, b), 25),
            "multiplier_bound": mp.nstr(multiplier_bound(b, xi), 25),
            "gap": mp.nstr(gap(zetas, delta_cap, big_m, nu), 25),
        })
    out = HERE.parent / "fixtures" / "bounds_reference.csv"
    with out.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {len(rows)} rows to {out}")


if __name__ == "__main__":
    main()
