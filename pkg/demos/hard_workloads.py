"""The point sets behind the lower bounds, checked query by query.

Run with ``python demos/hard_workloads.py``.
"""
# %%
from fractions import Fraction

from knnindex import build_expander
from knnindex.hard import (build_hamming_highdim, build_hamming_lowdim, build_linf_highdim,
                           build_linf_lowdim, verify_workload)

# %% Unit vectors: under l_inf the (1/2)-ball around q_I holds exactly I.
W = build_linf_highdim(6, 3)
print("distances to q_{1,2,5}:", [str(Fraction(int(x), 2)) for x in W.distances({1, 2, 5})])
print("exhaustive check:", verify_workload(W, exhaustive=True)["pass"])

# %% Under Hamming distance the gap is k-1 versus k+1.
W = build_hamming_highdim(6, 3)
print("hamming distances:", W.distances({1, 2, 5}).tolist())

# %% Low dimension needs an expander; a few unintended near points appear.
G = build_expander(64, 4, 6, Fraction(1, 3), seed=3)
report = verify_workload(build_linf_lowdim(G), samples=100, seed=0)
print(f"l_inf, d={G.d_right}: pass={report['pass']}, largest near set {report['max_near_set']} (<= 6)")

G = build_expander(64, 4, 6, Fraction(1, 4), seed=7)
report = verify_workload(build_hamming_lowdim(G), samples=100, seed=0)
print(f"hamming, d={G.d_right}: pass={report['pass']}, |I*| <= {report['max_unintended']}, "
      f"separation >= {report['min_separation_ratio']}")
