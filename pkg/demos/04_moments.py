"""
First and second moments of tuple counts in the models
======================================================

Monte Carlo counts of twin hits in (x, 2x] for the M1 and M2 models,
compared with the exact mean, plus the normalized variance Var / M^2
which falls as x grows.
"""

from bhlab import ModelSpec, normalize_tuple, parse_tuple
from bhlab.stats import monte_carlo

twin = normalize_tuple(parse_tuple("X,X+2"))

for kind in ("m1", "m2"):
    print(f"\n{kind}")
    for x in (10**4, 10**5):
        s = monte_carlo(ModelSpec(kind, seed=1), twin, x, x, trials=200)
        print(f"  x = {x:>6}  mean {s.mean:8.2f}  exact {s.exact_mean:8.2f}  z {s.z_score:+.2f}"
              f"  M {s.M:8.2f}  Var/M^2 {s.var_over_M2:.2e}")
