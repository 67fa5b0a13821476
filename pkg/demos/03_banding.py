# %% [markdown]
# More bands, looser limits
#
# The two-corridor fixture: two exporting areas feed a load centre over
# corridors A and B. Splitting the 2,000 scenarios into more operating-mode
# clusters lets each cluster keep a wider upper limit.

# %%
import time

from corridorlimits import fixtures
from corridorlimits.clustering import acc_cluster
from corridorlimits.netcase import compute_ptdf, corridor_flows
from corridorlimits.rulegen import build_rule_set, conservative_limits
from corridorlimits.security import label_dataset

case = fixtures.two_corridor_case()
table = fixtures.synthetic_scenarios(case, 2000, seed=0)
labels = label_dataset(case, table)
ptdf = compute_ptdf(case)
flows = corridor_flows(table.X, ptdf, case)
print(f"{(labels.aggregate == 0).sum()} of {len(table)} scenarios unsafe")

up, lo = conservative_limits(flows, labels.labels)
print(f"single band: A <= {up[0]:.1f} MW, B <= {up[1]:.1f} MW")

# %%
for k in (2, 5, 10, 20):
    t0 = time.perf_counter()
    model = acc_cluster(table.X, k, seed=0)
    rules = build_rule_set(model, flows, labels.labels, ["A", "B"], corridor_flows(model.raw_centers(), ptdf, case))
    n_boxes = sum(len(cb.boxes) for r in rules.rules for cb in r.coupled)
    print(f"k={k:2d}: max upper A {rules.max_upper(0):6.1f}, B {rules.max_upper(1):6.1f}, "
          f"{n_boxes} coupled boxes ({time.perf_counter() - t0:.1f} s)")
