"""Deployment-plan search across hardware, fleet size, parallelism,
framework and optimization choices.

For every candidate the engine runs the two-step procedure: first the
memory feasibility pass (weight slice per GPU, KV residency at the
worst-case context of prompt plus generated tokens, batch/sequence
adjustment), then task-list simulation and metric computation. Plans
that violate the budget, a throughput floor or a latency ceiling are
discarded; the survivors are ranked by the requested objective with
deterministic tie-breaks and the top three returned.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

from .analyzer import (
    Framework,
    InfeasibleError,
    MemoryBudget,
    OptimizationFlags,
    SchedulerConfig,
    WorkloadSpec,
    generate_task_list,
    kv_bytes_without_batch,
    max_seq_len,
)
from .catalog import Catalog, HardwareSpec, ModelSpec, model_weight_bytes
from .simulator import (
    ParallelConfig,
    SimResult,
    get_configurations,
    simulate_hybrid,
)

DEFAULT_FLEET_MAX = 8
TOP_K = 3


class Objective(str, Enum):
    MIN_LATENCY = "min_latency"
    MAX_THROUGHPUT = "max_throughput"


class PrecisionTolerance(str, Enum):
    STRICT = "strict"  # lossless optimizations only
    RELAXED = "relaxed"  # planner may enable KV-dropping optimizations


@dataclass(frozen=True)
class PlanRequest:
    model_name: str
    budget: float
    prompt_len: int
    output_len: int
    batch_size: int = 1
    objective: Objective = Objective.MIN_LATENCY
    throughput_floor: float | None = None  # tokens/s
    latency_ceiling: float | None = None  # seconds
    precision_tolerance: PrecisionTolerance = PrecisionTolerance.STRICT
    framework: Framework | None = None  # None searches both

    def __post_init__(self):
        if not self.budget > 0:
            raise ValueError(f"budget must be > 0, got {self.budget}")
        if self.prompt_len < 1:
            raise ValueError(f"prompt_len must be >= 1, got {self.prompt_len}")
        if self.output_len < 1:
            raise ValueError(f"output_len must be >= 1, got {self.output_len}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass(frozen=True)
class PlanMetrics:
    ttft: float  # seconds
    tpot: float  # seconds per output token
    batch_latency: float  # seconds
    throughput: float  # tokens/s
    memory_per_gpu: float  # bytes


@dataclass(frozen=True)
class DeploymentPlan:
    gpu: str
    gpu_count: int
    dp: int
    tp: int
    framework: Framework
    optimizations: OptimizationFlags
    adjusted_batch: int
    adjusted_seq: int
    metrics: PlanMetrics
    cost: float


@dataclass(frozen=True)
class PlanSearchResult:
    """Top plans plus, when empty, the constraint that bound most often."""

    plans: list[DeploymentPlan]
    binding_constraint: str | None = None
    candidates_evaluated: int = 0
    candidates_feasible: int = 0


# ---------------------------------------------------------------------------
# Step 1: memory feasibility
# ---------------------------------------------------------------------------

def available_memory(g: HardwareSpec, m: ModelSpec, tp: int) -> float:
    """Per-GPU bytes left for KV after the uniform weight slice.
    Negative means this (gpu, tp) cannot even hold the weights."""
    return g.memory_capacity - model_weight_bytes(m) / tp


def max_parallelism(g: HardwareSpec, m: ModelSpec, dp: int, tp: int, seq_len: int) -> int:
    """Requests servable fleet-wide: DP x (available memory / KV per
    request). Pass the worst-case resident length (prompt + output)."""
    avail = available_memory(g, m, tp)
    if avail <= 0:
        return 0
    return dp * int(avail // kv_bytes_without_batch(m, seq_len))


def residency_tokens(prompt_len: int, output_len: int, opts: OptimizationFlags,
                     block_tokens: int | None = None) -> int:
    """Worst-case KV tokens resident per sequence during a request.

    Without eviction the cache peaks at prompt + generated tokens. With
    h2o only the keep fraction of the decode-time cache stays live, but
    the full prompt must still fit at the end of prefill. Optional block
    rounding models paged allocation granularity.
    """
    peak = prompt_len + output_len
    if opts.h2o:
        peak = max(prompt_len, math.ceil(opts.h2o_keep_ratio * peak))
    if block_tokens:
        peak = math.ceil(peak / block_tokens) * block_tokens
    return peak


# ---------------------------------------------------------------------------
# Step 2: metrics
# ---------------------------------------------------------------------------

def ttft(sim: SimResult) -> float:
    """Time to first token: the simulated prefill phase seconds."""
    return sim.prefill.seconds


def tpot(sim: SimResult, output_len: int) -> float:
    """Decode seconds per generated token."""
    if output_len < 1:
        raise ValueError(f"output_len must be >= 1, got {output_len}")
    if sim.decode.seconds <= 0:
        raise ValueError("simulation has no decode phase")
    return sim.decode.seconds / output_len


def single_gpu_throughput(tpot_seconds: float) -> float:
    """tokens/s = 1 / TPOT."""
    if tpot_seconds <= 0:
        raise ValueError(f"tpot must be > 0, got {tpot_seconds}")
    return 1.0 / tpot_seconds


def multi_gpu_throughput(n_gpus: int, t_single: float, tp: int) -> float:
    """tokens/s = N * T_single / (1 + log2(tp)); tp must be a power of two."""
    if tp < 1 or tp & (tp - 1):
        raise ValueError(f"tp must be a power of two, got {tp}")
    return n_gpus * t_single / (1.0 + math.log2(tp))


# ---------------------------------------------------------------------------
# Search
# ---------------------------------------------------------------------------

def _optimization_candidates(precision: PrecisionTolerance) -> list[OptimizationFlags]:
    flags = [
        OptimizationFlags(),
        OptimizationFlags(flash_attention=True),
    ]
    if precision is PrecisionTolerance.RELAXED:
        flags.append(OptimizationFlags(h2o=True))
        flags.append(OptimizationFlags(flash_attention=True, h2o=True))
    return flags


def _clamp_prompt(budget: MemoryBudget, m: ModelSpec, req: PlanRequest,
                  opts: OptimizationFlags, block: int | None) -> int | None:
    """Longest prompt (<= requested) whose worst-case residency fits a
    single request; None when not even a one-token prompt fits."""
    limit = max_seq_len(budget, m, 1)
    if residency_tokens(req.prompt_len, req.output_len, opts, block) <= limit:
        return req.prompt_len
    lo, hi, best = 1, req.prompt_len, None
    while lo <= hi:
        mid = (lo + hi) // 2
        if residency_tokens(mid, req.output_len, opts, block) <= limit:
            best, lo = mid, mid + 1
        else:
            hi = mid - 1
    return best


@dataclass(frozen=True)
class _Candidate:
    gpu: HardwareSpec
    cfg: ParallelConfig
    framework: Framework
    opts: OptimizationFlags


def _evaluate(candidate: _Candidate, m: ModelSpec, req: PlanRequest,
              scheduler: SchedulerConfig) -> DeploymentPlan | str:
    """Returns a plan, or the name of the constraint that killed it."""
    g, cfg = candidate.gpu, candidate.cfg
    block = scheduler.paged_block_tokens if candidate.framework is Framework.DYN_BATCHING else None

    weights = model_weight_bytes(m)
    avail = available_memory(g, m, cfg.tp)
    if avail <= 0:
        return "memory_capacity"
    replica_budget = MemoryBudget.from_capacity(g.memory_capacity, weights / cfg.tp)

    adj_seq = _clamp_prompt(replica_budget, m, req, candidate.opts, block)
    if adj_seq is None:
        return "kv_memory"
    resident = residency_tokens(adj_seq, req.output_len, candidate.opts, block)
    replica_batch_max = int(avail // kv_bytes_without_batch(m, resident))
    if replica_batch_max < 1:
        return "kv_memory"
    adj_batch = min(req.batch_size, cfg.dp * replica_batch_max)

    workload = WorkloadSpec(
        batch_size=adj_batch,
        prompt_len=adj_seq,
        output_len=req.output_len,
        framework=candidate.framework,
        opts=candidate.opts,
    )
    group_budget = MemoryBudget.from_capacity(
        cfg.dp * g.memory_capacity, cfg.dp * weights / cfg.tp
    )
    try:
        tasks = generate_task_list(m, workload, group_budget, scheduler)
    except InfeasibleError:
        return "kv_memory"
    sim = simulate_hybrid(tasks, cfg, g)

    t_first = ttft(sim)
    t_per_token = tpot(sim, req.output_len)
    latency = sim.total_time
    throughput = multi_gpu_throughput(
        cfg.gpus_used, single_gpu_throughput(t_per_token), cfg.tp
    )
    if req.throughput_floor is not None and throughput < req.throughput_floor:
        return "throughput_floor"
    if req.latency_ceiling is not None and latency > req.latency_ceiling:
        return "latency_ceiling"

    replica_batch = math.ceil(adj_batch / cfg.dp)
    memory_per_gpu = weights / cfg.tp + replica_batch * kv_bytes_without_batch(m, resident)
    return DeploymentPlan(
        gpu=g.name,
        gpu_count=cfg.gpus_used,
        dp=cfg.dp,
        tp=cfg.tp,
        framework=candidate.framework,
        optimizations=candidate.opts,
        adjusted_batch=adj_batch,
        adjusted_seq=adj_seq,
        metrics=PlanMetrics(
            ttft=t_first,
            tpot=t_per_token,
            batch_latency=latency,
            throughput=throughput,
            memory_per_gpu=memory_per_gpu,
        ),
        cost=cfg.gpus_used * g.unit_price,
    )


def _ranking_key(plan: DeploymentPlan, objective: Objective):
    primary = (plan.metrics.batch_latency if objective is Objective.MIN_LATENCY
               else -plan.metrics.throughput)
    return (
        primary,
        plan.cost,
        plan.gpu_count,
        plan.gpu,
        plan.dp,
        plan.tp,
        plan.framework.value,
        plan.optimizations.flash_attention,
        plan.optimizations.h2o,
    )


def plan(
    req: PlanRequest,
    catalog: Catalog,
    fleet_max: int = DEFAULT_FLEET_MAX,
    scheduler: SchedulerConfig = SchedulerConfig(),
    top_k: int = TOP_K,
    workers: int | None = None,
) -> PlanSearchResult:
    """Search gpu x fleet x (dp, tp) x framework x optimizations and
    return the top plans for the requested objective.

    ``workers`` > 1 evaluates candidates in a thread pool; results are
    merged in enumeration order, so the outcome is identical either way.
    """
    m = catalog.model(req.model_name)
    frameworks = ([req.framework] if req.framework is not None
                  else [Framework.DYN_BATCHING, Framework.SPLIT_FUSE])
    flag_sets = _optimization_candidates(req.precision_tolerance)

    candidates: list[_Candidate] = []
    constraints: Counter[str] = Counter()
    for name in sorted(catalog.gpus):
        g = catalog.gpus[name]
        affordable = int(req.budget // g.unit_price)
        n_max = min(fleet_max, affordable)
        if n_max < 1:
            constraints["budget"] += 1
            continue
        for cfg in get_configurations(n_max):
            for framework in frameworks:
                for opts in flag_sets:
                    candidates.append(_Candidate(g, cfg, framework, opts))

    if workers is not None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(
                lambda c: _evaluate(c, m, req, scheduler), candidates
            ))
    else:
        outcomes = [_evaluate(c, m, req, scheduler) for c in candidates]

    plans: list[DeploymentPlan] = []
    for outcome in outcomes:
        if isinstance(outcome, DeploymentPlan):
            plans.append(outcome)
        else:
            constraints[outcome] += 1

    plans.sort(key=lambda p: _ranking_key(p, req.objective))
    if plans:
        return PlanSearchResult(
            plans=plans[:top_k],
            candidates_evaluated=len(candidates),
            candidates_feasible=len(plans),
        )
    binding = min(constraints.items(), key=lambda kv: (-kv[1], kv[0]))[0] if constraints else "budget"
    return PlanSearchResult(
        plans=[],
        binding_constraint=binding,
        candidates_evaluated=len(candidates),
        candidates_feasible=0,
    )
