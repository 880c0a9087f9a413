# %% [markdown]
# # The dense simplex solver on its own
#
# Two-phase tableau method with largest-coefficient pricing, switching to
# Bland's rule after a fixed number of pivots.

# %%
from queue_persuasion import simplex

lp = simplex.LpProblem(c=[3, 2], A_ub=[[1, 1], [1, 3]], b_ub=[4, 6],
                       names=("x", "y"), ub_labels=("budget", "labour"))
sol = simplex.solve(lp)
print(sol.status, sol.values, sol.objective, sol.iterations)

# %% [markdown]
# Problems serialize to a plain-text tableau for inspection or exchange.

# %%
text = simplex.dumps_tableau(lp)
print(text)
back = simplex.loads_tableau(text)
print(back.names, back.ub_labels, (back.A_ub == lp.A_ub).all())

# %%
print(simplex.check_solution(lp, [4.0, 0.0]))
