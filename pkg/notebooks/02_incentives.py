# %% [markdown]
# # Taxes, truth-telling and participation
#
# Given the allocations q(1), q(2) of a policy, the tax schedule is
# t1 = t0 + q1 and t2 = t0 + 2 q2 - q1.  Type 1 strictly prefers the truth by
# q2 - q1; type 2 is left exactly indifferent, which is what lets the
# designer extract the most.

# %%
from queue_persuasion import incentives
from queue_persuasion.model import utility_closed_form

taxes = incentives.build_taxes(t0=-0.1, q1=0.2, q2=0.5)
print(taxes)
for (i, m), u in incentives.misreport_utilities(taxes).items():
    print(f"type {i} reporting {m}: utility {u:+.3f}")

# %%
dsic = incentives.verify_dsic(taxes)
print(dsic.dsic_slacks, dsic.dsic_ok)

# %% [markdown]
# Participation compares the mechanism with joining on one's own at price p,
# which is worth (i * vbar - p)^+ to a type-i user.

# %%
ir = incentives.verify_ir(taxes, taxes.q1, vbar=0.3, p=0.2)
print(ir.ir_slacks, ir.ir_ok)

# %%
print("revenue", incentives.revenue(taxes, lam=1.2))
print("utility check", utility_closed_form(2, 1, taxes), utility_closed_form(2, 2, taxes))
