# %% [markdown]
# # Common signals and exceptional states
#
# An optimum may instead send both types the same recommendation below some
# blocking state, randomizing differently only at a few exceptional states.
# Every exceptional state x must satisfy one shared linear relation in
# (eps1, psi) whose coefficients are partial sums of lam^y v(y).  Here we
# plant a solution in a reward table and find it again.

# %%
import numpy as np

from queue_persuasion import structure

lam, eps, psi = 1.2, 0.3, -0.2
rng = np.random.default_rng(0)
v = rng.uniform(-1, 1, 8)
for x in (2, 4):
    w = lam ** np.arange(x + 1)
    v[x] = ((w[:-1] @ v[:x]) * (1 - 2 * eps) - psi * w.sum()) / (2 * eps * w[-1])

search = structure.solve_exceptional_system(structure.exceptional_candidates(6), v, lam)
for fit in search.accepted:
    if fit.determined:
        print(fit.states, round(fit.epsilon1, 12), round(fit.psi, 12))

# %% [markdown]
# A single state only pins down a line; a representative point is reported.

# %%
print(structure.fit_exceptional_states((3,), v, lam))
