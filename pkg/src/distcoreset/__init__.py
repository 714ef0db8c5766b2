"""Communication-aware distributed coreset construction for k-means/k-median."""

from .baselines import combine, zhang_tree_merge
from .coreset import (
    AllLocalCostsZero,
    CoresetPortion,
    SamplingPlan,
    allocate,
    build_centralized_coreset,
    build_distributed_coreset,
    make_sampling_plan,
    sample_portion,
    sampling_weights,
    union_coreset,
)
from .geometry import Objective, WeightedPointSet, closest_center, cost, distance
from .network import (
    CommLedger,
    GraphComm,
    NullComm,
    RootedTree,
    Topology,
    TreeComm,
    broadcast_scalars,
    flood,
    grid_topology,
    load_topology,
    preferential_topology,
    random_topology,
    save_topology,
    spanning_tree,
    tree_upcast,
)
from .partition import median_heuristic_bandwidth, partition
from .solvers import SolverParams, local_approximation, refine, seed
from .verify import brute_force_optimal, check_coreset, check_tech_bound, check_unbiased

__version__ = "0.1.0"
