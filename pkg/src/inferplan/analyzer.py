"""Closed-form memory and compute accounting for one inference request.

Covers the KV-cache arithmetic that drives batch/sequence feasibility,
the per-layer FLOP and byte accounting for prefill and decode passes,
and the translation of a workload into a schedule of simulatable tasks
under either of the two modeled serving disciplines:

* ``dyn_batching`` - vLLM-style: prompts processed in full passes with
  prompt priority, one prefill pass per sub-batch, then whole-batch
  decode steps.
* ``split_fuse`` - FastGen-style: prompts cut into chunks and packed
  into fixed token-budget iterations, then decode steps.

Everything here is a pure function over immutable inputs; callers may
evaluate candidate configurations concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .catalog import ModelSpec, model_weight_bytes


class InfeasibleError(Exception):
    """A workload cannot fit the memory budget; ``limit`` names the
    binding quantity ("batch", "sequence" or "memory")."""

    def __init__(self, message: str, limit: str):
        super().__init__(message)
        self.limit = limit


class Framework(str, Enum):
    DYN_BATCHING = "dyn_batching"
    SPLIT_FUSE = "split_fuse"


class Phase(str, Enum):
    PREFILL = "prefill"
    DECODE = "decode"


@dataclass(frozen=True)
class OptimizationFlags:
    """Cost-model modifiers for the supported attention optimizations.

    flash_attention drops the materialized score-matrix memory traffic;
    h2o keeps only ``h2o_keep_ratio`` of the KV cache live during decode.
    Neither changes any compute load.
    """

    flash_attention: bool = False
    h2o: bool = False
    h2o_keep_ratio: float | None = None  # None resolves to 0.2 when h2o is on

    def __post_init__(self):
        if self.h2o_keep_ratio is None:
            object.__setattr__(self, "h2o_keep_ratio", 0.2 if self.h2o else 1.0)
        if not self.h2o and self.h2o_keep_ratio != 1.0:
            raise ValueError("h2o_keep_ratio must be 1.0 when h2o is disabled")
        if not 0.0 < self.h2o_keep_ratio <= 1.0:
            raise ValueError(f"h2o_keep_ratio must be in (0, 1], got {self.h2o_keep_ratio}")


@dataclass(frozen=True)
class WorkloadSpec:
    """One request shape: batch, prompt length, tokens to generate."""

    batch_size: int
    prompt_len: int
    output_len: int
    framework: Framework = Framework.DYN_BATCHING
    opts: OptimizationFlags = OptimizationFlags()

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.prompt_len < 1:
            raise ValueError(f"prompt_len must be >= 1, got {self.prompt_len}")
        if self.output_len < 1:
            raise ValueError(f"output_len must be >= 1, got {self.output_len}")


@dataclass(frozen=True)
class SchedulerConfig:
    """Tunable scheduling knobs with FastGen-flavored defaults."""

    batch_split_size: int = 8  # requests per prefill sub-batch (dyn_batching)
    seq_chunk_tokens: int = 256  # prompt chunk length (split_fuse)
    fuse_token_budget: int = 256  # tokens per fused iteration (split_fuse)
    paged_block_tokens: int | None = None  # optional KV block rounding (dyn_batching)

    def __post_init__(self):
        if self.batch_split_size < 1 or self.seq_chunk_tokens < 1 or self.fuse_token_budget < 1:
            raise ValueError("scheduler sizes must be >= 1")
        if self.paged_block_tokens is not None and self.paged_block_tokens < 1:
            raise ValueError("paged_block_tokens must be >= 1 when set")


@dataclass(frozen=True)
class MemoryBudget:
    """Per-GPU (or DP-aggregated) byte budget for KV storage."""

    c_gpu: float
    c_model: float
    c_available: float

    def __post_init__(self):
        if abs(self.c_available - (self.c_gpu - self.c_model)) > 1e-6:
            raise ValueError("c_available must equal c_gpu - c_model")
        if self.c_available < 0:
            raise InfeasibleError(
                f"model weights ({self.c_model:.3g} B) exceed GPU memory "
                f"({self.c_gpu:.3g} B)",
                limit="memory",
            )

    @classmethod
    def from_capacity(cls, c_gpu: float, c_model: float) -> "MemoryBudget":
        return cls(c_gpu=c_gpu, c_model=c_model, c_available=c_gpu - c_model)


@dataclass(frozen=True)
class Task:
    """One simulatable unit of work.

    ``batch_size`` is the number of sequences the task covers (the
    dimension data parallelism shards); ``token_count`` is the tokens the
    task produces. ``layer_sync_bytes`` is the per-layer activation
    payload a tensor-parallel allreduce would move for this pass.
    """

    phase: Phase
    compute_load: float  # FLOPs
    data_size: float  # bytes read + written
    data_transferred: float  # baseline host<->device bytes
    token_count: int
    batch_size: int
    layer_sync_bytes: float
    num_layers: int

    def __post_init__(self):
        for name in ("compute_load", "data_size", "data_transferred",
                     "token_count", "batch_size", "layer_sync_bytes"):
            if getattr(self, name) < 0:
                raise ValueError(f"task field {name} must be >= 0")
        if self.phase is Phase.DECODE and self.token_count < 1:
            raise ValueError("decode tasks must produce at least one token")


# ---------------------------------------------------------------------------
# KV-cache arithmetic (exact integer math)
# ---------------------------------------------------------------------------

def kv_bytes_per_request(m: ModelSpec, seq_len: int, batch_size: int) -> int:
    """KV bytes held for a batch: 2 * N * H_kv * S * B * kv."""
    return 2 * m.num_layers * m.kv_hidden_size * seq_len * batch_size * m.kv_bytes


def kv_bytes_without_batch(m: ModelSpec, seq_len: int) -> int:
    """KV bytes per single request: 2 * N * H_kv * S * kv."""
    return 2 * m.num_layers * m.kv_hidden_size * seq_len * m.kv_bytes


def kv_bytes_without_seqlen(m: ModelSpec, batch_size: int) -> int:
    """KV bytes per token across the batch: 2 * N * H_kv * B * kv."""
    return 2 * m.num_layers * m.kv_hidden_size * batch_size * m.kv_bytes


def max_batch_size(budget: MemoryBudget, m: ModelSpec, seq_len: int) -> int:
    """Largest batch whose KV fits: floor(C_available / kv_without_batch).

    Returns 0 when not even a single request fits; callers must treat 0
    as infeasible. The adjusted batch is min(B_input, B_max).
    """
    return int(budget.c_available // kv_bytes_without_batch(m, seq_len))


def max_seq_len(budget: MemoryBudget, m: ModelSpec, batch_size: int) -> int:
    """Largest resident sequence length: floor(C_available / kv_without_seqlen)."""
    return int(budget.c_available // kv_bytes_without_seqlen(m, batch_size))


def split_batch(batch_size: int, split_size: int) -> list[int]:
    """Greedy partition of a batch into sub-batches of at most split_size."""
    if split_size < 1:
        raise ValueError(f"split_size must be >= 1, got {split_size}")
    full, rest = divmod(batch_size, split_size)
    return [split_size] * full + ([rest] if rest else [])


def split_sequence(seq_len: int, split_size: int) -> tuple[int, int]:
    """Number of prompt chunks and the effective sequence length.

    num_splits = ceil(S / split_size). Chunk rounding never inflates the
    billed tokens, so the adjusted length equals S unless the rounded
    total somehow fell below it (it cannot; kept for symmetry).
    """
    if split_size < 1:
        raise ValueError(f"split_size must be >= 1, got {split_size}")
    num_splits = math.ceil(seq_len / split_size)
    adjusted = num_splits * split_size
    return num_splits, adjusted if adjusted <= seq_len else seq_len


def chunk_sizes(seq_len: int, split_size: int) -> list[int]:
    """Per-chunk token counts for a chunked prompt pass."""
    return split_batch(seq_len, split_size)


# ---------------------------------------------------------------------------
# Per-layer cost accounting (dense decoder, 2 FLOPs per multiply-add)
# ---------------------------------------------------------------------------

def matmul_flops(m: int, k: int, n: int) -> int:
    """FLOPs of an (m x k) @ (k x n) product."""
    return 2 * m * k * n


def _pass_layer_costs(
    m: ModelSpec,
    batch_size: int,
    new_tokens: int,
    ctx_end: int,
    phase: Phase,
    opts: OptimizationFlags,
) -> tuple[float, float]:
    """FLOPs and bytes of one transformer layer processing ``new_tokens``
    per sequence with ``ctx_end`` total context tokens visible."""
    h, i = m.hidden_size, m.ffn_size
    positions = batch_size * new_tokens

    flops = 4 * matmul_flops(positions, h, h)  # Q, K, V, O projections
    flops += 2 * matmul_flops(positions, h, ctx_end)  # scores + weighted values
    flops += matmul_flops(positions, h, i) + matmul_flops(positions, i, h)  # FFN

    act_bytes = m.weight_bytes  # activations kept at weight precision
    weights = (4 * h * h + 2 * h * i) * m.weight_bytes
    activations = (2 * positions * h + 2 * positions * i) * act_bytes
    kv_write = 2 * m.kv_hidden_size * positions * m.kv_bytes
    kv_read = 2 * m.kv_hidden_size * batch_size * ctx_end * m.kv_bytes
    if phase is Phase.DECODE and opts.h2o:
        kv_read *= opts.h2o_keep_ratio

    bytes_rw = weights + activations + kv_write + kv_read
    if phase is Phase.PREFILL and not opts.flash_attention:
        # materialized score matrix, written then read
        bytes_rw += 2 * batch_size * m.num_heads * new_tokens * ctx_end * act_bytes
    return float(flops), float(bytes_rw)


def layer_costs(
    m: ModelSpec,
    phase: Phase,
    batch_size: int,
    s_ctx: int,
    opts: OptimizationFlags = OptimizationFlags(),
) -> tuple[float, float]:
    """Per-layer (FLOPs, bytes) for a full prefill pass over ``s_ctx``
    prompt tokens, or one decode step at context length ``s_ctx``."""
    if phase is Phase.PREFILL:
        return _pass_layer_costs(m, batch_size, s_ctx, s_ctx, phase, opts)
    return _pass_layer_costs(m, batch_size, 1, s_ctx, phase, opts)


def _embedding_costs(m: ModelSpec, batch_size: int, new_tokens: int) -> tuple[float, float, float]:
    """(flops, bytes, transferred) of the token embedding lookup."""
    positions = batch_size * new_tokens
    bytes_rw = 2 * positions * m.hidden_size * m.weight_bytes  # gather rows + write acts
    transferred = 4 * positions  # int32 token ids onto the device
    return 0.0, float(bytes_rw), float(transferred)


def _head_costs(m: ModelSpec, logit_positions: int) -> tuple[float, float, float]:
    """(flops, bytes, transferred) of the LM-head projection for
    ``logit_positions`` output positions."""
    h, v = m.hidden_size, m.vocab_size
    flops = matmul_flops(logit_positions, h, v)
    bytes_rw = h * v * m.weight_bytes + logit_positions * (h + v) * m.weight_bytes
    transferred = 4 * logit_positions  # sampled ids back off the device
    return float(flops), float(bytes_rw), float(transferred)


def _build_task(
    m: ModelSpec,
    phase: Phase,
    batch_size: int,
    new_tokens: int,
    ctx_end: int,
    opts: OptimizationFlags,
    token_count: int,
    with_head: bool,
) -> Task:
    layer_flops, layer_bytes = _pass_layer_costs(m, batch_size, new_tokens, ctx_end, phase, opts)
    flops = m.num_layers * layer_flops
    bytes_rw = m.num_layers * layer_bytes

    e_flops, e_bytes, e_xfer = _embedding_costs(m, batch_size, new_tokens)
    flops += e_flops
    bytes_rw += e_bytes
    transferred = e_xfer
    if with_head:
        h_flops, h_bytes, h_xfer = _head_costs(m, batch_size)
        flops += h_flops
        bytes_rw += h_bytes
        transferred += h_xfer

    return Task(
        phase=phase,
        compute_load=flops,
        data_size=bytes_rw,
        data_transferred=transferred,
        token_count=token_count,
        batch_size=batch_size,
        layer_sync_bytes=float(batch_size * new_tokens * m.hidden_size * m.weight_bytes),
        num_layers=m.num_layers,
    )


def generate_task_list(
    m: ModelSpec,
    w: WorkloadSpec,
    budget: MemoryBudget,
    config: SchedulerConfig = SchedulerConfig(),
) -> list[Task]:
    """Expand a workload into the prefill/decode task schedule of its
    framework. Expects batch and sequence already adjusted to the budget;
    re-applies the clamps defensively and raises InfeasibleError when the
    budget admits no batch or no sequence at all.
    """
    b_max = max_batch_size(budget, m, w.prompt_len)
    if b_max < 1:
        raise InfeasibleError(
            f"no batch fits: one request at S={w.prompt_len} needs "
            f"{kv_bytes_without_batch(m, w.prompt_len)} B of KV, "
            f"{budget.c_available:.3g} B available",
            limit="batch",
        )
    batch = min(w.batch_size, b_max)
    s_max = max_seq_len(budget, m, batch)
    if s_max < 1:
        raise InfeasibleError(
            f"no sequence fits at batch {batch}", limit="sequence"
        )
    seq = min(w.prompt_len, s_max)

    tasks: list[Task] = []
    if w.framework is Framework.DYN_BATCHING:
        # prompt-priority: each sub-batch runs its full prompt in one pass
        for sub in split_batch(batch, config.batch_split_size):
            tasks.append(_build_task(
                m, Phase.PREFILL, sub, seq, seq, w.opts,
                token_count=sub, with_head=True,
            ))
        decode_groups = [batch]
    else:
        per_seq_chunk = max(1, min(config.seq_chunk_tokens,
                                   config.fuse_token_budget // batch))
        sizes = chunk_sizes(seq, per_seq_chunk)
        ctx = 0
        for idx, size in enumerate(sizes):
            ctx += size
            last = idx == len(sizes) - 1
            tasks.append(_build_task(
                m, Phase.PREFILL, batch, size, ctx, w.opts,
                token_count=batch if last else 0, with_head=last,
            ))
        decode_groups = split_batch(batch, config.fuse_token_budget)

    for step in range(1, w.output_len + 1):
        for group in decode_groups:
            tasks.append(_build_task(
                m, Phase.DECODE, group, 1, seq + step, w.opts,
                token_count=group, with_head=True,
            ))
    return tasks


def format_task_list(tasks: list[Task]) -> str:
    """Plain-text dump of a task schedule for debugging."""
    header = f"{'#':>3} {'phase':<8} {'batch':>6} {'tokens':>7} {'GFLOP':>12} {'MB r/w':>12} {'MB xfer':>10}"
    lines = [header]
    for idx, t in enumerate(tasks):
        lines.append(
            f"{idx:>3} {t.phase.value:<8} {t.batch_size:>6} {t.token_count:>7} "
            f"{t.compute_load / 1e9:>12.3f} {t.data_size / 1e6:>12.3f} "
            f"{t.data_transferred / 1e6:>10.6f}"
        )
    return "\n".join(lines)
