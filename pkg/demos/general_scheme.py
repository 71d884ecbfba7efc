"""Storing each point's k-NN list gives a 3-approximation, and no better.

Run with ``python demos/general_scheme.py``.
"""
# %%
from fractions import Fraction

import numpy as np

from knnindex import (answer_general_3apx, build_general_3apx, certify_ck_answer,
                      make_tightness_instance, metrics)

# %% A random l1 instance: every answer lands within 3r of the query.
rng = np.random.default_rng(0)
P = metrics.random_points(rng, 150, 8, "l1")
index = build_general_3apx(P, k=6, B=4, metric="l1")
print("blocks:", index.scheme.space_usage, "=", P.n, "* ceil(6/4)")

worst = Fraction(0)
for _ in range(200):
    q = metrics.random_query(rng, P)
    reported, io = answer_general_3apx(index, q)
    cert = certify_ck_answer(P, q, 6, 3, reported, "l1")
    assert cert.ok and io == 2
    worst = max(worst, cert.worst_ratio)
print("worst ratio over 200 queries:", worst)

# %% The line instance pushes the ratio to 3/(1+eps).
for eps in (Fraction(1, 2), Fraction(1, 10), Fraction(1, 100)):
    P, q = make_tightness_instance(5, eps)
    reported, _ = answer_general_3apx(build_general_3apx(P, 5, 1, "l1"), q)
    cert = certify_ck_answer(P, q, 5, 3, reported, "l1")
    print(f"eps={eps}: reported {sorted(reported)}, ratio {cert.worst_ratio}")
