# %% [markdown]
# # The sampling verifier
#
# One round draws a monomial with probability proportional to its weight,
# reads its bits and reports `sign * prod y_i`, the outcome of a Hadamard test
# on a phase of plus or minus one.  After `T` rounds it accepts when the
# estimate reaches the cut.  The exact acceptance probability comes from the
# trinomial law of the plus and minus counts.

# %%
from fractions import Fraction

import numpy as np

from qcollapse.clausepoly import cnf_to_mtp
from qcollapse.cnf import CnfFormula
from qcollapse.verifier import (acceptance_probability_exact, build_verifier, check_pcp_contract,
                                hadamard_test_statevector, run_verifier)

inst = cnf_to_mtp(CnfFormula(3, [(1,), (-2, 3), (2, -3), (1, 3)]))
spec = build_verifier(inst, Fraction(1, 3))
print(f"B={spec.total_weight} T={spec.repetitions} q={spec.query_bound} "
      f"c={spec.completeness} s={spec.soundness} c-s={spec.completeness_raw - spec.soundness_raw}")

# %%
rep = check_pcp_contract(spec, inst, mode="exact", full_table=True)
print(rep.promise.value, rep.holds, rep.witnesses)
for y in ((1, 1, 1), (1, 0, 0), (0, 1, 1)):
    p = acceptance_probability_exact(spec, y)
    mc = np.mean([run_verifier(spec, y, s).accepted for s in range(300)])
    print(y, f"exact {float(p):.4f}  Monte-Carlo {mc:.3f}")

# %% [markdown]
# A statevector simulation of the Hadamard test confirms the outcome law
# `(1 + Re phase) / 2` used above.

# %%
print([hadamard_test_statevector(y, (1, 2)) for y in ((0, 0), (1, 0), (1, 1))])
