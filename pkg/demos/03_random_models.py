"""
Five random models of the primes
================================

Each model is a seeded random set.  Membership is a pure function of
(seed, integer), so any window can be generated on demand.
"""

import numpy as np

from bhlab import ModelSpec, SetInstance
from bhlab.sieve import prime_bitmap

lo, hi = 10**5, 2 * 10**5
true = prime_bitmap(lo, hi).sum()
print(f"primes in [{lo}, {hi}]: {true}")

for kind in ("cramer", "granville", "m1", "m2", "bft_r"):
    inst = SetInstance(ModelSpec(kind, seed=2024))
    bits = inst.materialize(lo, hi)
    ms = np.flatnonzero(bits) + lo
    even = np.count_nonzero(ms % 2 == 0)
    print(f"{kind:>9}: {bits.sum():6d} members, {even:5d} even, clamped {inst.clamp_count}")

# Cramer and the BFT set happily contain even numbers; the other three
# never do, because p = 2 is always sieved deterministically.

# The BFT set uses a random class a_2: when a_2 = 1 it contains no odd number at all.
for seed in range(4):
    inst = SetInstance(ModelSpec("bft_r", seed=seed))
    ms = np.flatnonzero(inst.materialize(10, 10**4)) + 10
    print(f"bft_r seed {seed}: a_2 = {inst.residue(2)}, odd members {np.count_nonzero(ms % 2)}")
