"""
Recovering rho from synthetic careers
=====================================

Generate cohorts with a known preferential share, then check that the
aggregate maximum-likelihood estimate lands back on it.  External and self
citations are fitted separately while both keep feeding the citation state.
"""

import numpy as np

from citeflow import CohortProfile, estimate_aggregate, generate_cohort, loglik_curve

# One cohort per ground-truth value; 200 authors over 15-25 year careers
# give a bit more than 10^5 informative events each.
for i, rho in enumerate([0.0, 0.2, 0.5, 0.7, 0.9]):
    cohort = generate_cohort(200, CohortProfile(rho_external=rho, years=(15, 25), external_rate=1.2), seed=i)
    res = estimate_aggregate(cohort, "all")
    print(f"rho* = {rho:.1f}   rho_hat = {res.rho_hat:.4f}   events = {res.identifiable_events}")

# %%
# A mixed cohort: external citations follow the rich-get-richer rule with
# weight 0.8, self citations are spread uniformly.
mixed = generate_cohort(
    200, CohortProfile(rho_external=0.8, rho_self=0.0, self_prob=0.5, years=(15, 25)), seed=42
)
for kind in ("all", "external", "self"):
    print(f"{kind:>8}: rho_hat = {estimate_aggregate(mixed, kind).rho_hat:.4f}")

# %%
# The log-likelihood is concave in rho; a coarse curve shows where the
# maximum sits for each filter.
grid = np.linspace(0.0, 0.99, 12)
for kind in ("external", "self"):
    curve = loglik_curve(mixed, kind, grid)
    best = max(curve, key=lambda rv: rv[1])
    print(f"{kind:>8} curve peaks near rho = {best[0]:.2f}")
