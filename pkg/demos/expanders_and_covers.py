"""Expander certification and block cover costs in the indexability model.

Run with ``python demos/expanders_and_covers.py``.
"""
# %%
from fractions import Fraction

import numpy as np

from knnindex import (IndexingScheme, build_expander, cover_set_exact, cover_set_greedy,
                      verify_expander)
from knnindex.expander import redirect_edge

# %% Build, certify, and then break an expander.
G = build_expander(16, 2, 4, Fraction(1, 3), seed=1)
print("certified:", G.certified, "subsets checked:", verify_expander(G).subsets_checked)
rng = np.random.default_rng(0)
flags = sum(not verify_expander(redirect_edge(G, rng)).ok for _ in range(100))
print(f"{flags}/100 single-edge redirects violate expansion")

# %% A query costs the fewest blocks that cover its answer.
s = IndexingScheme(6, 3, [{1, 2, 3}, {1, 4}, {2, 5}, {3, 6}])
print("exact:", cover_set_exact(s, range(1, 7)).block_indices)
print("greedy:", cover_set_greedy(s, range(1, 7)).block_indices)
