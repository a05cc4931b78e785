"""Task-list execution model for hybrid data/tensor parallel GPU groups.

Each task's time is the sum of three components: compute (FLOPs over
peak compute), memory read/write (bytes over memory bandwidth) and
communication (transferred bytes plus tensor-parallel allreduce volume
over interconnect bandwidth, plus per-message latency). Tensor
parallelism divides per-GPU compute and resident data ``tp`` ways and
pays ring-allreduce synchronization twice per layer; data parallelism
splits the batch across replicas and the slowest replica sets the pace.

All functions are pure; distinct configurations can be simulated
concurrently without shared state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .analyzer import Phase, Task
from .catalog import HardwareSpec


class Bottleneck(str, Enum):
    COMPUTE_BOUND = "compute_bound"
    MEMORY_BOUND = "memory_bound"
    COMM_BOUND = "comm_bound"


@dataclass(frozen=True)
class ParallelConfig:
    """A (dp, tp) placement; tp must be a power of two."""

    dp: int
    tp: int

    def __post_init__(self):
        if self.dp < 1:
            raise ValueError(f"dp must be >= 1, got {self.dp}")
        if self.tp < 1 or self.tp & (self.tp - 1):
            raise ValueError(f"tp must be a power of two, got {self.tp}")

    @property
    def gpus_used(self) -> int:
        return self.dp * self.tp


@dataclass(frozen=True)
class PhaseBreakdown:
    """Slowest-replica timing of one phase, split by component."""

    seconds: float
    compute_seconds: float
    rw_seconds: float
    comm_seconds: float
    bottleneck: Bottleneck


@dataclass(frozen=True)
class SimResult:
    config: ParallelConfig
    prefill: PhaseBreakdown
    decode: PhaseBreakdown

    @property
    def total_time(self) -> float:
        return self.prefill.seconds + self.decode.seconds


def tp_sync_bytes(t: Task, tp: int) -> float:
    """Ring-allreduce traffic for one task: two allreduces per layer,
    each moving 2*(tp-1)/tp of the activation payload."""
    if tp == 1:
        return 0.0
    return 2 * t.num_layers * (2 * (tp - 1) / tp) * t.layer_sync_bytes


def tp_sync_count(t: Task, tp: int) -> int:
    """Synchronization messages for one task: 2*N*ceil(log2(tp))."""
    if tp == 1:
        return 0
    return 2 * t.num_layers * math.ceil(math.log2(tp))


def compute_time(t: Task, g: HardwareSpec, tp: int = 1) -> float:
    return (t.compute_load / tp) / g.peak_compute


def rw_time(t: Task, g: HardwareSpec, tp: int = 1) -> float:
    return (t.data_size / tp) / g.memory_bandwidth


def transfer_time(t: Task, g: HardwareSpec, tp: int = 1) -> float:
    volume = t.data_transferred + tp_sync_bytes(t, tp)
    return volume / g.comm_bandwidth + tp_sync_count(t, tp) * g.comm_latency


def task_components(
    t: Task, g: HardwareSpec, tp: int = 1, scale: float = 1.0
) -> tuple[float, float, float]:
    """(compute, rw, comm) seconds for a batch fraction of a task.

    ``scale`` shards the batch-proportional quantities; a zero-size
    shard costs nothing, including synchronization latency.
    """
    if scale == 0.0:
        return 0.0, 0.0, 0.0
    comp = scale * compute_time(t, g, tp)
    rw = scale * rw_time(t, g, tp)
    comm = (scale * (t.data_transferred + tp_sync_bytes(t, tp)) / g.comm_bandwidth
            + tp_sync_count(t, tp) * g.comm_latency)
    return comp, rw, comm


def task_time(t: Task, g: HardwareSpec, tp: int = 1, overlap: bool = False) -> float:
    """Total task seconds; ``overlap`` uses the roofline variant where
    compute and memory traffic hide each other instead of adding."""
    comp, rw, comm = task_components(t, g, tp)
    if overlap:
        return max(comp, rw) + comm
    return comp + rw + comm


def is_compute_bound(t: Task, g: HardwareSpec, tp: int = 1) -> bool:
    return compute_time(t, g, tp) >= rw_time(t, g, tp)


def get_configurations(num_gpus: int) -> list[ParallelConfig]:
    """All (dp, tp) with dp*tp <= num_gpus and tp a power of two,
    ordered dp ascending then tp ascending."""
    if num_gpus < 1:
        raise ValueError(f"num_gpus must be >= 1, got {num_gpus}")
    configs = []
    for dp in range(1, num_gpus + 1):
        tp = 1
        while dp * tp <= num_gpus:
            configs.append(ParallelConfig(dp=dp, tp=tp))
            tp *= 2
    return configs


def _shard_sizes(batch: int, dp: int) -> list[int]:
    base, rem = divmod(batch, dp)
    return [base + (1 if r < rem else 0) for r in range(dp)]


def _classify(comp: float, rw: float, comm: float) -> Bottleneck:
    if comm > comp and comm > rw:
        return Bottleneck.COMM_BOUND
    return Bottleneck.COMPUTE_BOUND if comp >= rw else Bottleneck.MEMORY_BOUND


def simulate_hybrid(
    tasks: list[Task],
    cfg: ParallelConfig,
    g: HardwareSpec,
    fleet_size: int | None = None,
    overlap: bool = False,
) -> SimResult:
    """Execute a task list under one (dp, tp) placement.

    Each task's batch is split into dp near-equal shards; replicas run
    concurrently so a phase takes as long as its slowest replica, plus
    one cross-replica synchronization latency per phase when dp > 1.
    """
    if not tasks:
        raise ValueError("task list is empty")
    if fleet_size is not None and cfg.gpus_used > fleet_size:
        raise ValueError(
            f"configuration needs {cfg.gpus_used} GPUs but only {fleet_size} available"
        )

    phases = {}
    for phase in (Phase.PREFILL, Phase.DECODE):
        phase_tasks = [t for t in tasks if t.phase is phase]
        slowest = (0.0, 0.0, 0.0, 0.0)
        for replica in range(cfg.dp):
            comp = rw = comm = folded = 0.0
            for t in phase_tasks:
                shard = _shard_sizes(t.batch_size, cfg.dp)[replica]
                c, r, x = task_components(t, g, cfg.tp, scale=shard / t.batch_size)
                comp, rw, comm = comp + c, rw + r, comm + x
                folded += max(c, r)  # memory traffic hidden behind compute
            total = (folded + comm) if overlap else (comp + rw + comm)
            if total > slowest[0]:
                slowest = (total, comp, rw, comm)
        total, comp, rw, comm = slowest
        if phase_tasks and cfg.dp > 1:
            total += g.comm_latency  # one cross-replica sync per phase boundary
            comm += g.comm_latency
        phases[phase] = PhaseBreakdown(
            seconds=total,
            compute_seconds=comp,
            rw_seconds=rw,
            comm_seconds=comm,
            bottleneck=_classify(comp, rw, comm),
        )
    return SimResult(config=cfg, prefill=phases[Phase.PREFILL], decode=phases[Phase.DECODE])


def rank_configs(results: list[SimResult], k: int = 3) -> list[SimResult]:
    """Top-k results by total time; ties prefer fewer GPUs, then lower tp."""
    ordered = sorted(results, key=lambda r: (r.total_time, r.config.gpus_used, r.config.tp))
    return ordered[:k]


def format_timing(tasks: list[Task], g: HardwareSpec, tp: int = 1) -> str:
    """Per-task component breakdown as plain text, for --dump-timing."""
    header = (f"{'#':>3} {'phase':<8} {'compute_s':>12} {'rw_s':>12} "
              f"{'comm_s':>12} {'total_s':>12} {'bound':<14}")
    lines = [header]
    for idx, t in enumerate(tasks):
        comp, rw, comm = task_components(t, g, tp)
        bound = "compute" if comp >= rw else "memory"
        lines.append(
            f"{idx:>3} {t.phase.value:<8} {comp:>12.6f} {rw:>12.6f} "
            f"{comm:>12.6f} {comp + rw + comm:>12.6f} {bound:<14}"
        )
    return "\n".join(lines)
