# %% [markdown]
# # Clause arithmetization
#
# Each clause becomes its multilinear indicator `1 - prod(1 - literal)`.  The
# average over `m` clauses equals the fraction of satisfied clauses, so the
# value 1 is reached exactly on satisfying assignments.

# %%
import itertools

from qcollapse.clausepoly import clause_indicator, cnf_to_mtp, width_reduce
from qcollapse.cnf import CnfFormula, projected_counts
from qcollapse.poly import brute_force_decide, descaled

print("Q(x1 or x2) =", clause_indicator((1, 2)))
f = CnfFormula(3, [(1, 2), (-1, 3), (-2, -3)])
inst = cnf_to_mtp(f)
for x in itertools.product((0, 1), repeat=3):
    print(x, descaled(inst.poly, x), f.count_satisfied(x))

# %%
assert set(brute_force_decide(inst).witnesses) == set(projected_counts(f))

# %% [markdown]
# Wide clauses are split with functionally forced link variables before
# arithmetization, which keeps the witness projections and their counts.

# %%
wide = CnfFormula(5, [(1, 2, 3, 4, 5), (-1, -2)])
narrow = width_reduce(wide, 3)
print(narrow.clauses)
assert projected_counts(narrow) == projected_counts(wide)
