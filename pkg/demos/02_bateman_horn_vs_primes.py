"""
Bateman-Horn prediction against the actual primes
=================================================

Counts n <= x with every f_j(n) prime and compares them with the main
term M(x) = S * integral du / prod log f_j(u).
"""

from bhlab import main_term, normalize_tuple, parse_tuple, singular_series
from bhlab.stats import ORACLE, hit_series

for text in ("X,X+2", "X,X+4", "X^2+1"):
    tup = normalize_tuple(parse_tuple(text))
    S = singular_series(tup, 10**6).value
    xs = [10**3, 10**4, 10**5] if tup.is_linear else [10**3, 10**4]
    series = hit_series(ORACLE, tup, xs, S=S)
    print(f"\n{text}: S = {S:.6f}")
    for x, count, M, delta in series.rows:
        print(f"  x = {x:>7}  count {count:>6}  M {M:10.1f}  relative gap {delta / M:+.4f}")

# Twin primes up to 10^6: 8169 pairs against M of about 8246.
tw = normalize_tuple(parse_tuple("X,X+2"))
print("\nM(10^6) for twins:", round(main_term(tw, singular_series(tw, 10**6).value, 10**6), 1))
