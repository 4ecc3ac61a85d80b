"""
Blocks used in the almost-sure argument
=======================================

x_{m+1} = x_m + x_m exp(-(log x_m)^(1/3)).  The number of blocks per
dyadic interval grows like exp((log X)^(1/3)).  For each block the twin
count among the true primes is set against its main term.
"""

import math

from bhlab import normalize_tuple, parse_tuple, singular_series
from bhlab.stats import ORACLE, block_deviations, block_sequence

seq = block_sequence(K0=100, x_max=10**6)
for X, count in seq.dyadic_counts()[::3]:
    print(f"(X, 2X] with X = {X:>9.0f}: {count:3d} blocks, exp((log X)^(1/3)) = {math.exp(math.log(X) ** (1/3)):.1f}")

twin = normalize_tuple(parse_tuple("X,X+2"))
S = singular_series(twin, 10**6).value
rows = block_deviations(ORACLE, twin, seq, S)
for xm, dm, count, M in rows[-5:]:
    print(f"block ({xm:9.0f}, {xm + dm:9.0f}]  count {count:5d}  M {M:8.1f}  ratio {count / M:.3f}")
