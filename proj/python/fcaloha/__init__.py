"""Frameless ALOHA with capture: density evolution and Monte-Carlo simulation."""

from ._core import (
    BetaOptimum,
    CaptureTable,
    ChannelParams,
    DeResult,
    GridSpec,
    Reception,
    RunStats,
    SnrMode,
    SweepConfig,
    SweepPoint,
    SystemParams,
    Termination,
    build_capture_table,
    c1_closed_form,
    collision_only_table,
    default_table_t_max,
    evaluate_point,
    fixed_point,
    grid_search,
    intra_slot_sic_oracle,
    optimize_beta,
    poisson_degree_pmfs,
    run_batch,
    run_contention,
    singleton_capture_prob,
    slot_access_probability,
    summarize,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
