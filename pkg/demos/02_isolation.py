# %% [markdown]
# # Isolating a witness with XOR hashes
#
# A random affine hash over GF(2) is conjoined row by row.  Unsatisfiable
# inputs stay unsatisfiable for every seed; a satisfiable input has, with
# noticeable probability, some prefix that leaves exactly one witness.

# %%
import numpy as np

from qcollapse.cnf import CnfFormula, projected_counts
from qcollapse.isolation import draw_hash, exact_isolation_probability, isolate, isolation_success

f = CnfFormula(4, [(1, 2), (-1, 3), (2, -4)])
print("witnesses:", list(projected_counts(f)))

# %%
seed = 3
h = draw_hash(f.num_originals, seed)
for k, g in enumerate(isolate(f, seed), start=1):
    print(f"k={k} rows={h.rows[:k]} witnesses={list(projected_counts(g))}")

# %% [markdown]
# Success frequency over many seeds, next to the exact probability for a tiny
# two-witness formula obtained by enumerating the whole hash family.

# %%
two = CnfFormula(2, [(1, 2), (-1, -2)])
exact = exact_isolation_probability([(0, 1), (1, 0)], 2)
rate = np.mean([isolation_success(two, s) is not None for s in range(3000)])
print(f"exact {float(exact):.4f}  empirical {rate:.4f}")

# %%
contradiction = CnfFormula(3, [(1,), (-1,)])
assert all(not projected_counts(g) for s in range(50) for g in isolate(contradiction, s))
print("no seed ever satisfies an unsatisfiable input")
