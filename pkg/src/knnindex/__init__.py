"""External-memory (c, k)-nearest-neighbor indexing schemes in the indexability model."""
from .metrics import PointSet, bit_points, dense_points, distance, from_rationals
from .model import (CoverSet, IndexingScheme, Instance, QuerySpec, answer_valid, cover_set_exact,
                    cover_set_greedy, validate_scheme)
from .oracle import KnnResult, certify_ck_answer, knn_exact
from .general import answer_general_3apx, build_general_3apx, make_tightness_instance
from .hamming import answer_hamming, build_hamming_index
from .expander import BipartiteExpander, build_expander, verify_expander
from .tradeoff import (build_alpha_subset_scheme, counting_inequality_holds, min_t_relaxed,
                       space_lb_exact_workload, space_lb_relaxed)

__version__ = "0.1.0"
