# %% [markdown]
# # Saddle points over quantum states
#
# `max_rho min_sigma Tr(R (rho x sigma))` over density matrices.  The inner
# player is eliminated by conic duality, so each order of play is one
# semidefinite program, and both orders are certified by evaluating the
# returned states against the opponent's exact best response.

# %%
import math

import numpy as np

from qcollapse.saddle import (check_collapse_structure, ent_bounded_set, full_set, random_observable,
                              ree_upper, rel_entropy, separable_set, solve_level2, solve_nested_level3,
                              solve_reduced)

rng = np.random.default_rng(0)
R = random_observable(4, rng)
res = solve_level2(R, 2, 2)
print(f"maxmin {res.maxmin:.9f}  minmax {res.minmax:.9f}  gap {res.gap:.1e}  {res.certificate.value}")

# %% [markdown]
# Relative entropy of entanglement: an upper bound from an explicit separable
# state, here on a Bell state where the exact value is ln 2.

# %%
bell = np.zeros(4)
bell[[0, 3]] = 2 ** -0.5
rho = np.outer(bell, bell)
print(ree_upper(rho, (2, 2)), math.log(2), rel_entropy(rho, np.diag([0.5, 0, 0, 0.5])))

# %% [markdown]
# Constrained players: separable or entanglement-bounded maximizers.  The value
# can only grow with the bound.

# %%
R8 = random_observable(8, rng)
for b in (0.0, 0.2, 0.5, math.log(2)):
    r = solve_reduced(R8, ent_bounded_set(b, 2, 2), full_set(2))
    print(f"b={b:.3f}  [{r.value_lower:.6f}, {r.value_upper:.6f}]  {r.certificate.value}")

# %% [markdown]
# Three rounds in the literal order max-min-max, evaluated on a net of first
# messages with cutting-plane refinement, next to the two-round reduced form.

# %%
nested = solve_nested_level3(R8, (2, 2, 2), None, resolution=200)
reduced = solve_reduced(R8, full_set(4), full_set(2))
print(f"nested {nested:.6f}  reduced {reduced.value:.6f}")
nested0 = solve_nested_level3(R8, (2, 2, 2), 0.0, resolution=200)
print(f"b2=0: nested {nested0:.6f}  reduced {solve_reduced(R8, separable_set(2, 2), full_set(2)).value:.6f}")

# %%
rep = check_collapse_structure(6, 0.0, 0.0, observables=[random_observable(16, rng)])
print(rep.status, rep.max_delta)
