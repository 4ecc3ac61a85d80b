"""
Exact expectations on a toy prime set
=====================================

With constant thresholds t = 2, z = 7 the random residues a_3, a_5, a_7
are the only randomness, so E R_{n1} R_{n2} can be checked against a
full enumeration of the 105 residue assignments.
"""

from bhlab import ThresholdProfile, normalize_tuple, parse_tuple
from bhlab.stats import brute_force_pair, expected_pair_exact, in_degenerate_set

toy = ThresholdProfile.fixed(2, 7)
twin = normalize_tuple(parse_tuple("X,X+2"))

for n1, n2 in [(5, 5), (5, 7), (5, 8), (17, 29), (11, 32)]:
    exact = expected_pair_exact(twin, n1, n2, toy)
    brute = brute_force_pair(twin, n1, n2, toy)
    tag = "degenerate" if in_degenerate_set(twin, n1, n2) else ""
    print(f"({n1:>2}, {n2:>2})  product {str(exact):>8}  enumeration {str(brute):>8}  {tag}")
