# %% [markdown]
# Coupled safe region for one corridor pair
#
# Toy data: a sample is unstable when the two flows together exceed 120 MW,
# plus the odd scattered unstable point. The per-corridor limits alone give
# a small box; the grid search walks out along the diagonal edge.

# %%
import numpy as np

from corridorlimits.rulegen import Box, cell_of, grid_boundary, initial_limits

rng = np.random.default_rng(3)
n = 3000
pa, pb = rng.uniform(0, 100, n), rng.uniform(0, 100, n)
safe = ~((pa + pb > 120) | (rng.random(n) < 0.002))

up_a, lo_a = initial_limits(pa, safe)
up_b, lo_b = initial_limits(pb, safe)
box = Box(lo_a, up_a, lo_b, up_b)
print(f"independent box: A <= {up_a:.1f}, B <= {up_b:.1f}")

# %%
cb = grid_boundary(pa, pb, safe, (10, 10), initial_box=box, seed_point=(30.0, 30.0))
print(f"{len(cb.safe_cells)} cells reached from seed cell {cb.seed_cell}, {len(cb.boxes)} boxes emitted")

# '#' reached, 'o' safe but cut off, 'x' holds an unstable sample, '.' empty.
n_a, n_b = cb.resolution
stable = np.zeros((n_a, n_b), bool)
unstable = np.zeros((n_a, n_b), bool)
for x, y, ok in zip(pa, pb, safe):
    i, j = cell_of(x, cb.origin[0], cb.step[0], n_a), cell_of(y, cb.origin[1], cb.step[1], n_b)
    if i is not None and j is not None:
        (stable if ok else unstable)[i, j] = True
for j in reversed(range(n_b)):
    row = ""
    for i in range(n_a):
        if (i, j) in cb.safe_cells:
            row += "#"
        else:
            row += "x" if unstable[i, j] else ("o" if stable[i, j] else ".")
    print(row)

# %% [markdown]
# Points inside the region are accepted even when they break one of the
# independent limits.

# %%
for p in [(35.0, 60.0), (60.0, 35.0), (70.0, 70.0)]:
    print(p, "inside box:", box.contains(*p), "inside region:", cb.contains(*p))
