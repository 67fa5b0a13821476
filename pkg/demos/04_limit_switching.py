# %% [markdown]
# Unit commitment with limits that follow the operating mode
#
# Four limit regimes on the same four-hour case. With switching, the
# optimizer picks a dispatch and the cluster whose center is nearest to it,
# and only that cluster's limits apply.

# %%
from corridorlimits import fixtures
from corridorlimits.clustering import acc_cluster
from corridorlimits.netcase import compute_ptdf, corridor_flows
from corridorlimits.rulegen import build_rule_set, conservative_limits
from corridorlimits.security import label_dataset
from corridorlimits.switching import solve_switching_uc
from corridorlimits.ucmodel import UCConfig, compute_metrics, solve_uc

case = fixtures.two_corridor_case()
table = fixtures.synthetic_scenarios(case, 2000, seed=0)
labels = label_dataset(case, table)
ptdf = compute_ptdf(case)
flows = corridor_flows(table.X, ptdf, case)
model = acc_cluster(table.X, 5, seed=0)
rules = build_rule_set(model, flows, labels.labels, ["A", "B"], corridor_flows(model.raw_centers(), ptdf, case))

# %%
sols = {
    "none": solve_uc(case, UCConfig()),
    "conservative": solve_uc(case, UCConfig(limit_regime="conservative"), conservative_limits(flows, labels.labels)),
    "independent": solve_switching_uc(case, UCConfig(limit_regime="independent"), rules, model),
    "coupled": solve_switching_uc(case, UCConfig(limit_regime="coupled"), rules, model),
}
for name, sol in sols.items():
    m = compute_metrics(sol, case)
    print(f"{name:13s} cost {m.total_cost:10.1f}  wind used {100 * m.consumption_rate:5.1f} %  "
          f"curtailed {m.curtailed_mwh:6.1f} MWh")

# %% [markdown]
# Hour by hour for the coupled regime: which cluster is active and how close
# the corridor flows run to its limits.

# %%
sol = sols["coupled"]
for t, j in enumerate(sol.active_cluster):
    lims = sol.active_limits[t]
    row = ", ".join(f"{c.id} {sol.flows[s, t]:6.1f} in [{lims[c.id][0]:.1f}, {lims[c.id][1]:.1f}]"
                    for s, c in enumerate(case.corridors))
    print(f"t={t}: cluster {j}: {row}")
