"""Coded-caching rate experiments: placement, delivery, bounds, demands.

A server holds N equal-size files and broadcasts to K caches over a
shared link. During placement each cache stores a fraction m of the
library, arranged so that file pieces are shared by subsets of caches.
During delivery every cache requests one file and the server broadcasts
XOR-coded messages that several caches can use at once. This package
computes the achievable broadcast rates of symmetric placements, adapts
the delivery plan to demand redundancy (several caches asking for the
same file), compares everything against a cutset lower bound, and
simulates correlated request processes to measure the average gains.

The public surface is re-exported here; see the module docstrings for
the underlying conventions (1-based cache and file indices, bitmask
subset encoding, non-increasing redundancy patterns).
"""

from .bounds import BoundReport, average_bound, cutset_bound
from .cli import GapReport, ScenarioConfig, gap_reduction, main, run_scenario
from .core import (
    CacheSubset,
    DemandVector,
    RedundancyPattern,
    SystemConfig,
    binomial,
    partitions_into_parts,
    redundancy_pattern,
    subsets_of_size,
)
from .delivery import (
    DecodeError,
    Message,
    MessageSchedule,
    RateReport,
    SimplifiedPlan,
    TransferPlan,
    adaptive_plan,
    adaptive_rate_direct,
    build_messages,
    canonical_demand,
    decode,
    peak_rate_centralized,
    peak_rate_decentralized,
    rate_nonadaptive,
    rate_of_schedule,
    simplified_plan,
    transfer_cutoff,
)
from .demand import (
    ChainState,
    CorrelationModel,
    DemandStats,
    PopularityDist,
    complete_graph,
    conditional_pmf,
    empirical_stats,
    epsr,
    gibbs_sweep,
    init_chain,
    load_edge_list,
    mean_request_index,
    sample_chains,
    sample_demands,
    zipf_pmf,
)
from .lp import LinearProgram, LpNumericalError, LpSolution, solve
from .placement import (
    PartitionMap,
    PlacementProfile,
    ProfileCheck,
    apportion,
    centralized_profile,
    decentralized_profile,
    materialize_partition,
    solve_placement_lp,
    validate_profile,
)

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "CacheSubset",
    "ChainState",
    "CorrelationModel",
    "DecodeError",
    "DemandStats",
    "DemandVector",
    "GapReport",
    "LinearProgram",
    "LpNumericalError",
    "LpSolution",
    "Message",
    "MessageSchedule",
    "PartitionMap",
    "PlacementProfile",
    "PopularityDist",
    "ProfileCheck",
    "RateReport",
    "RedundancyPattern",
    "ScenarioConfig",
    "SimplifiedPlan",
    "SystemConfig",
    "TransferPlan",
    "adaptive_plan",
    "adaptive_rate_direct",
    "apportion",
    "average_bound",
    "binomial",
    "build_messages",
    "canonical_demand",
    "centralized_profile",
    "complete_graph",
    "conditional_pmf",
    "cutset_bound",
    "decentralized_profile",
    "decode",
    "empirical_stats",
    "epsr",
    "gap_reduction",
    "gibbs_sweep",
    "init_chain",
    "load_edge_list",
    "main",
    "materialize_partition",
    "mean_request_index",
    "partitions_into_parts",
    "peak_rate_centralized",
    "peak_rate_decentralized",
    "rate_nonadaptive",
    "rate_of_schedule",
    "redundancy_pattern",
    "run_scenario",
    "sample_chains",
    "sample_demands",
    "simplified_plan",
    "solve",
    "solve_placement_lp",
    "subsets_of_size",
    "transfer_cutoff",
    "validate_profile",
    "zipf_pmf",
]
