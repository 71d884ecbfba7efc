"""Random parity maps per radius, certified over every query of {0,1}^10.

Run with ``python demos/hamming_scheme.py``.
"""
# %%
import time

import numpy as np

from knnindex import answer_hamming, build_hamming_index, certify_ck_answer, metrics
from knnindex.hamming import answer_hamming_all_maps

rng = np.random.default_rng(1)
P = metrics.bit_points(rng.integers(0, 2, (128, 10)))

# %% Build with the default D and R; every query gets a designated map.
t0 = time.perf_counter()
index = build_hamming_index(P, k=4, c=2, B=4, seed=0)
print(f"built in {time.perf_counter() - t0:.2f}s, D={index.D}, R={index.R}, "
      f"{len(index.designation)} queries certified")
for r, s in sorted(index.radii.items()):
    print(f"  r={r}: {s.stats['queries']} queries, success rate {s.stats['map_success_rate']:.3f}")

# %% One I/O per query; the all-maps fallback reads R of them.
q = metrics.to_bits(0b1011001110, 10)
reported, io = answer_hamming(index, q)
print("answer", reported, "io", io, "ok", certify_ck_answer(P, q, 4, 2, reported, "hamming").ok)
reported, io = answer_hamming_all_maps(index, q)
print("fallback", reported, "io", io)
print("space bound:", index.space_blocks, "<=", index.space_bound, "blocks")
