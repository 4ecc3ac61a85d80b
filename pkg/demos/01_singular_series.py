"""
Singular series for a few classic tuples
========================================

The truncated product for the singular series converges slowly, so two
estimators are printed side by side: the direct product and the Mertens
rescaled one.  Their spread shrinks as the cutoff grows.
"""

from bhlab import normalize_tuple, parse_tuple, singular_series

# twin primes, prime triplets and Landau's n^2 + 1
tuples = ["X", "X,X+2", "X,X+2,X+6", "X^2+1"]

for text in tuples:
    tup = normalize_tuple(parse_tuple(text))
    print(f"\n{text}  (shift {tup.shift})")
    for P in (10**3, 10**4, 10**5, 10**6):
        est = singular_series(tup, P)
        print(f"  P = {P:>8}  direct {est.direct:.8f}  mertens {est.mertens:.8f}  spread {est.spread:.1e}")

# For (X) the product is identically 1: each factor is (1 - 1/p)(1 - 1/p)^-1.
