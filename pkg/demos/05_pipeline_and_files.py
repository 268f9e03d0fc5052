# %% [markdown]
# # The whole chain, plus the command-line formats
#
# `pipeline` runs threshold instance -> CNF -> isolation -> clause polynomial
# -> verifier contract for one seed and records exact witness counts at every
# stage.  The same steps are available as subcommands of `qcollapse.cli`,
# which read and write JSON instances and DIMACS files.

# %%
import json
import tempfile
from pathlib import Path

from qcollapse.cli import main
from qcollapse.pipeline import gen_instance, pipeline

inst = gen_instance("planted", seed=4, n=4)
for seed in range(4):
    rep = pipeline(inst, seed, contract_mode="certified", stop_on_success=True)
    print(seed, "success k:", rep.success_k, "survivor:", rep.surviving_witness)

# %%
for line in list(pipeline(inst, 1, contract_mode="certified").lines())[:4]:
    print(line)

# %%
no = gen_instance("no", seed=2, n=4)
assert all(pipeline(no, s, contract_mode="certified").soundness_ok for s in range(10))
print("NO instance: every stage stays NO")

# %% [markdown]
# Command-line round trip in a scratch directory.  Exit code 0 means every
# check passed, 1 a contract violation, 2 an input error.

# %%
work = Path(tempfile.mkdtemp())
print(main(["gen", "--profile", "planted", "--n", "3", "--seed", "7", "--out", str(work / "p.json")]))
print(main(["reduce", "mtp2sat", str(work / "p.json"), "--out", str(work / "p.cnf")]))
print(main(["reduce", "isolate", str(work / "p.cnf"), "--seed", "1"]))
print(main(["verify", "--instance", str(work / "p.json"), "--out", str(work / "verdict.json")]))
print(json.loads((work / "verdict.json").read_text())["holds"])
