# %% [markdown]
# # The desk benchmark
#
# `nce bench --preset table1-desk` runs cross-entropy and the full method on
# four noise settings with three seeds each (several minutes). This notebook
# reads a saved results file if one is given, and otherwise runs a one-seed,
# shortened version so it finishes quickly.

# %%
import json
import sys

from nce import Config, bench

if len(sys.argv) > 1 and sys.argv[1].endswith(".json"):
    results = json.load(open(sys.argv[1]))
else:
    quick = Config(T_tr=30)
    results = bench.run_preset("table1-desk", seeds=1, config=quick, log=lambda m: None)

# %%
print(f"{'cell':22s} {'mean':>7s} {'std':>7s}")
for key, cell in results["cells"].items():
    acc = cell["test_accuracy"]
    print(f"{key:22s} {acc['mean']:7.3f} {acc['std']:7.3f}")

# %%
for name, check in bench.table1_checks(results).items():
    print(f"{'PASS' if check['pass'] else 'FAIL'}  {name}: {check['value']:.1f}")
