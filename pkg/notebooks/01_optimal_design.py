# %% [markdown]
# # Solving for the revenue-maximizing admission signal
#
# A designer sees the backlog of an M/M/1 queue and recommends "join" or
# "balk" to each arriving user, who has privately reported a type.  The
# designer charges a tax that depends on the report.  Optimizing over
# occupation measures turns the whole design into one linear program.

# %%
from queue_persuasion import lp_builder, structure
from queue_persuasion.model import reference_config

cfg = reference_config(price=0.0)
print(cfg.to_dict())

# %% [markdown]
# The LP has one variable per (signal, type, state) plus the tax offset.

# %%
problem = lp_builder.build_lp(cfg)
print(problem.n_vars, "variables,", problem.n_eq, "equalities,", problem.n_ub, "inequalities")

# %%
sol = lp_builder.solve_design(cfg)
print(f"revenue {sol.revenue:.4f} after {sol.diagnostics['iterations']} pivots")
print(sol.taxes)

# %% [markdown]
# Type 2 hears "join" while rewards are positive; type 1 picks up the
# negative-reward states.  Print the states where either type is admitted
# only part of the time.

# %%
for x in range(cfg.x_max + 1):
    s1, s2 = sol.policy.admit[:, x]
    if sol.mu.mu[x] > 1e-9 and (0 < s1 < 1 or 0 < s2 < 1):
        print(x, round(s1, 4), round(s2, 4), f"{sol.mu.mu[x]:.3e}")

# %%
print(structure.classify(sol).to_dict())

# %% [markdown]
# With a posted price on the outside option the designer earns more, and
# still beats the price-only benchmark of lam * p / 2.

# %%
priced = lp_builder.solve_design(reference_config(price=0.2))
print(f"revenue {priced.revenue:.4f}, outside option {cfg.lam * 0.2 / 2:.4f}")
