"""JSON wire schema for the planner: request and response models shared
by the CLI ``--json`` output and the HTTP service, so the two surfaces
are structurally identical. Unknown fields are rejected by name.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from .analyzer import Framework, OptimizationFlags
from .engine import (
    DeploymentPlan,
    Objective,
    PlanRequest,
    PlanSearchResult,
    PrecisionTolerance,
)

NO_FEASIBLE_PLAN = "NO_FEASIBLE_PLAN"


class WireRequest(BaseModel):
    """Planning request as accepted on the wire; mirrors PlanRequest."""

    model_config = ConfigDict(extra="forbid")

    model: str
    budget: float = Field(gt=0)
    prompt_len: int = Field(ge=1)
    output_len: int = Field(ge=1)
    batch_size: int = Field(default=1, ge=1)
    objective: Literal["min_latency", "max_throughput"] = "min_latency"
    throughput_floor: Optional[float] = Field(default=None, gt=0)
    latency_ceiling: Optional[float] = Field(default=None, gt=0)
    precision_tolerance: Literal["strict", "relaxed"] = "strict"
    framework: Literal["dyn_batching", "split_fuse", "search"] = "search"

    def to_plan_request(self) -> PlanRequest:
        return PlanRequest(
            model_name=self.model,
            budget=self.budget,
            prompt_len=self.prompt_len,
            output_len=self.output_len,
            batch_size=self.batch_size,
            objective=Objective(self.objective),
            throughput_floor=self.throughput_floor,
            latency_ceiling=self.latency_ceiling,
            precision_tolerance=PrecisionTolerance(self.precision_tolerance),
            framework=None if self.framework == "search" else Framework(self.framework),
        )


class WireOptimizations(BaseModel):
    model_config = ConfigDict(extra="forbid")

    flash_attention: bool
    h2o: bool
    h2o_keep_ratio: float

    @classmethod
    def from_flags(cls, flags: OptimizationFlags) -> "WireOptimizations":
        return cls(
            flash_attention=flags.flash_attention,
            h2o=flags.h2o,
            h2o_keep_ratio=flags.h2o_keep_ratio,
        )


class WireMetrics(BaseModel):
    model_config = ConfigDict(extra="forbid")

    ttft: float
    tpot: float
    batch_latency: float
    throughput: float
    memory_per_gpu: float


class WirePlan(BaseModel):
    model_config = ConfigDict(extra="forbid")

    gpu: str
    gpu_count: int
    dp: int
    tp: int
    framework: Literal["dyn_batching", "split_fuse"]
    optimizations: WireOptimizations
    adjusted_batch: int
    adjusted_seq: int
    metrics: WireMetrics
    cost: float

    @classmethod
    def from_plan(cls, p: DeploymentPlan) -> "WirePlan":
        return cls(
            gpu=p.gpu,
            gpu_count=p.gpu_count,
            dp=p.dp,
            tp=p.tp,
            framework=p.framework.value,
            optimizations=WireOptimizations.from_flags(p.optimizations),
            adjusted_batch=p.adjusted_batch,
            adjusted_seq=p.adjusted_seq,
            metrics=WireMetrics(
                ttft=p.metrics.ttft,
                tpot=p.metrics.tpot,
                batch_latency=p.metrics.batch_latency,
                throughput=p.metrics.throughput,
                memory_per_gpu=p.metrics.memory_per_gpu,
            ),
            cost=p.cost,
        )


class WireError(BaseModel):
    model_config = ConfigDict(extra="forbid")

    code: str
    message: str
    binding_constraint: Optional[str] = None


class WireResponse(BaseModel):
    """Either a ranked plan list or a domain error, never both."""

    model_config = ConfigDict(extra="forbid")

    plans: Optional[list[WirePlan]] = None
    error: Optional[WireError] = None

    @classmethod
    def from_search(cls, result: PlanSearchResult) -> "WireResponse":
        if result.plans:
            return cls(plans=[WirePlan.from_plan(p) for p in result.plans])
        return cls(error=WireError(
            code=NO_FEASIBLE_PLAN,
            message="no deployment plan satisfies the request",
            binding_constraint=result.binding_constraint,
        ))


class WireGpu(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    peak_compute: float
    memory_capacity: float
    memory_bandwidth: float
    comm_bandwidth: float
    comm_latency: float
    unit_price: float


class WireModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    num_layers: int
    hidden_size: int
    num_heads: int
    num_kv_heads: int
    ffn_size: int
    vocab_size: int
    weight_bytes: int
    kv_bytes: int
    param_count: int
