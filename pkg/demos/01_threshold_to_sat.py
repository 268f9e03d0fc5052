# %% [markdown]
# # From a threshold polynomial to CNF
#
# A multilinear threshold instance asks whether some Boolean `y` pushes a
# polynomial `P` to at least `a`.  Here we build a small instance, decide it by
# enumeration, and compile it into a CNF whose satisfying assignments project
# exactly onto the witnesses.

# %%
from fractions import Fraction

from qcollapse.cnf import count_models, projected_counts, to_dimacs
from qcollapse.compiler import mtp_to_sat
from qcollapse.poly import MtpInstance, MultilinearPoly, brute_force_decide, classify_promise, instance_to_json

# P(y) = (y1 + y2 + y3 - y1 y2) / 2 on the grid {0, 1/2, 1}
poly = MultilinearPoly(3, 2, 1, {(1,): 1, (2,): 1, (3,): 1, (1, 2): -1}, scale_den=2)
inst = MtpInstance(poly, threshold=Fraction(1), gap=Fraction(1, 2), value_set_size=3)
print(instance_to_json(inst))

# %%
dec = brute_force_decide(inst)
print("witnesses:", dec.witnesses, "promise:", classify_promise(inst).value)

# %% [markdown]
# The compiler encodes every monomial with an AND gate, selects the constant
# bits of each coefficient, sums the bundles with a balanced adder tree and
# compares against the scaled threshold.  Each auxiliary is a function of the
# inputs, so every witness has exactly one extension.

# %%
cnf = mtp_to_sat(inst)
print(f"{cnf.num_vars} variables ({cnf.num_originals} original), {len(cnf.clauses)} clauses")
counts = projected_counts(cnf)
print("projections:", counts)
assert tuple(counts) == dec.witnesses and count_models(cnf) == len(dec.witnesses)
print(to_dimacs(cnf).splitlines()[0])
