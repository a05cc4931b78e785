"""Analytical planner for LLM inference deployments.

Predicts batch latency, TTFT, decode throughput and memory fit from
closed-form cost models, and searches hardware x parallelism x
framework configurations for the best plans under a budget.
"""

__version__ = "0.1.0"

from .analyzer import (
    Framework,
    InfeasibleError,
    MemoryBudget,
    OptimizationFlags,
    Phase,
    SchedulerConfig,
    Task,
    WorkloadSpec,
    generate_task_list,
    kv_bytes_per_request,
    kv_bytes_without_batch,
    kv_bytes_without_seqlen,
    layer_costs,
    max_batch_size,
    max_seq_len,
    split_batch,
    split_sequence,
)
from .catalog import (
    Catalog,
    CatalogError,
    HardwareSpec,
    ModelSpec,
    default_catalog,
    load_catalog,
    model_param_count,
    model_weight_bytes,
)
from .engine import (
    DeploymentPlan,
    Objective,
    PlanMetrics,
    PlanRequest,
    PlanSearchResult,
    PrecisionTolerance,
    available_memory,
    max_parallelism,
    multi_gpu_throughput,
    plan,
    single_gpu_throughput,
    tpot,
    ttft,
)
from .simulator import (
    Bottleneck,
    ParallelConfig,
    SimResult,
    compute_time,
    get_configurations,
    rank_configs,
    rw_time,
    simulate_hybrid,
    task_time,
    transfer_time,
)

__all__ = [name for name in dir() if not name.startswith("_")]
