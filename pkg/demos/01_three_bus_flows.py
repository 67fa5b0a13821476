# %% [markdown]
# Transfer factors and security labels on a three-bus triangle
#
# All three lines have the same reactance, so power injected at bus 2 and
# withdrawn at the slack (bus 1) splits 2/3 on the direct path and 1/3
# around the triangle.

# %%
import numpy as np

from corridorlimits import fixtures
from corridorlimits.netcase import OperatingScenario, bus_ptdf, compute_ptdf, corridor_flow
from corridorlimits.security import assess_scenario, dc_power_flow

case = fixtures.three_bus_case()
H = bus_ptdf(case)
print("bus PTDF (rows = lines 1-2, 2-3, 1-3; columns = buses 1..3)")
print(np.round(H, 4))

# %% [markdown]
# A dispatch where G1 exports heavily. Corridor S1 collects the two lines
# leaving bus 1.

# %%
ptdf = compute_ptdf(case)
sc = OperatingScenario("heavy", np.array([250.0, 0.0]), np.array([0.0]), np.array([60.0, 190.0]))
print("line flows (MW):", np.round(dc_power_flow(case, sc), 2))
print("S1 export (MW):", np.round(corridor_flow(sc, ptdf, case), 2))
for h in case.contingencies:
    print(f"  {h.id}: {'safe' if assess_scenario(case, sc, h) else 'unsafe'}")

# %% [markdown]
# Losing line 1-2 pushes everything through 1-3, which is rated 100 MW.

# %%
mid = OperatingScenario("mid", np.array([110.0, 0.0]), np.array([0.0]), np.array([60.0, 50.0]))
print("after losing line 1:", np.round(dc_power_flow(case, mid, outage=1), 2))
print("labels:", {h.id: assess_scenario(case, mid, h) for h in case.contingencies})
