"""Counting bounds on space versus I/Os, and the scheme that meets them.

Run with ``python demos/tradeoffs.py``.
"""
# %%
import itertools
import math

import mpmath

from knnindex import (build_alpha_subset_scheme, cover_set_exact, min_t_relaxed,
                      space_lb_exact_workload, space_lb_relaxed)
from knnindex.tradeoff import TradeoffParams, counting_inequality_holds

# %% The counting inequality, exactly.
print(counting_inequality_holds(TradeoffParams(6, 2, 2, 3, 1)))
print(counting_inequality_holds(TradeoffParams(100, 10, 2, 2, 1))[0])

# %% More blocks buy fewer I/Os.
for s in (10 ** 2, 10 ** 4, 10 ** 6, 10 ** 9):
    res = min_t_relaxed(10 ** 6, 8, 16, s)
    print(f"s={s:>10}: t_min={res.t_min}, closed form {mpmath.nstr(res.closed_form, 6)}")

# %% Closed-form space bounds.
print("relaxed:", mpmath.nstr(space_lb_relaxed(10 ** 6, 10, 100, 1), 6))
print("exact:  ", mpmath.nstr(space_lb_exact_workload(10 ** 6, 10, 100, 2), 6))

# %% Storing every alpha-subset answers any lam-set in ceil(lam/alpha) I/Os.
scheme = build_alpha_subset_scheme(8, 2, 2)
costs = {cover_set_exact(scheme, Q).cost for Q in itertools.combinations(range(1, 9), 5)}
print(f"{scheme.space_usage} blocks, cover costs {costs}, ceil(5/2) = {math.ceil(5 / 2)}")
