"""Exact nearest-neighbor search over ball trees, with a benchmark harness.

Three interchangeable indexes share one search implementation: a ball tree
split by farthest-point pivots (``moore``), a ball tree split along the
first principal direction of each node (``pca``), and a median-cut KD
baseline (``kd``).  Queries are range search, K nearest neighbors, and
K nearest neighbors constrained to a radius; all are exact and every result
can be cross-checked against linear-scan oracles.
"""

from .core import (
    Ball,
    BuildStats,
    Dataset,
    DegenerateData,
    Node,
    Point,
    Tree,
    TreeStats,
    ball_intersects,
    bounding_ball,
    distance,
    distances_to,
    iter_nodes,
)
from .pca import Projection, covariance_matrix, principal_direction, project
from .partition import (
    SplitConfig,
    SplitOutcome,
    build_tree,
    choose_threshold,
    split_kd,
    split_moore,
    split_pca,
    tree_stats,
)
from .search import (
    KnnState,
    QueryResult,
    constrained_nn,
    knn_search,
    node_lower_bound,
    oracle_constrained,
    oracle_knn,
    oracle_range,
    range_search,
)
from .datagen import (
    GenSpec,
    gen_highleyman,
    gen_latin_center,
    gen_lithuanian,
    gen_sobol,
    gen_uniform_queries,
    generate,
    load_csv,
    write_csv,
)
from .bench import (
    BenchConfig,
    BenchReport,
    ExactnessViolation,
    WorkloadSpec,
    calibrate_radius,
    emit_report,
    run_benchmark,
    scalability_sweep,
)

__version__ = "0.1.0"
