#!/usr/bin/env python3
"""Exact re-derivation of the main-polynomial radius search with fractions.

Independent of the lindex package; used to cross-check find_main_polynomial.

  python scripts/main_poly_oracle.py --a 1,100 --N 0 --d 1
  -> {"c": 74, "m0": 2, "k0": 0, "r": "1/10952"}
"""
from __future__ import annotations
import argparse
import json
from fractions import Fraction
from math import factorial


def oracle(a, N: int, d) -> dict:
    a = [Fraction(x) for x in a]
    d = Fraction(d)
    c = 2 * ((N + 1) ** 3 + 6 * factorial(N + 3))
    hi = len(a) - 1
    m = 0
    while True:
        r = d / ((d + 1) * c ** m)
        terms = [a[k] * r ** k for k in range(hi + 1)]
        mu = max(terms)
        s = terms.index(mu)
        mu_star = max([t for k, t in enumerate(terms) if k != s], default=Fraction(0))
        if mu_star * c <= mu:
            return {'c': c, 'm0': m, 'k0': s, 'r': str(r)}
        hi = s
        m += 1


def main():
    parser = argparse.ArgumentParser(description="Fraction-exact main-polynomial search.")
    parser.add_argument("--a", required=True, help="Comma-separated diagonal sequence (integers or fractions)")
    parser.add_argument("--N", type=int, default=0)
    parser.add_argument("--d", default="1")
    args = parser.parse_args()
    print(json.dumps(oracle(args.a.split(','), args.N, args.d)))


if __name__ == "__main__":
    main()
