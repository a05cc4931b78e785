/** Wire-level types for the planning service (mirrors the JSON schema
 * fixtures in ../schema). */

export type FrameworkChoice = 'dyn_batching' | 'split_fuse' | 'search';
export type ObjectiveChoice = 'min_latency' | 'max_throughput';
export type PrecisionChoice = 'strict' | 'relaxed';

export interface WireRequest {
  model: string;
  budget: number;
  prompt_len: number;
  output_len: number;
  batch_size: number;
  objective: ObjectiveChoice;
  throughput_floor: number | null;
  latency_ceiling: number | null;
  precision_tolerance: PrecisionChoice;
  framework: FrameworkChoice;
}

export interface WireMetrics {
  ttft: number;
  tpot: number;
  batch_latency: number;
  throughput: number;
  memory_per_gpu: number;
}

export interface WireOptimizations {
  flash_attention: boolean;
  h2o: boolean;
  h2o_keep_ratio: number;
}

export interface WirePlan {
  gpu: string;
  gpu_count: number;
  dp: number;
  tp: number;
  framework: 'dyn_batching' | 'split_fuse';
  optimizations: WireOptimizations;
  adjusted_batch: number;
  adjusted_seq: number;
  metrics: WireMetrics;
  cost: number;
}

export interface WireError {
  code: string;
  message: string;
  binding_constraint?: string | null;
}

export interface WireResponse {
  plans?: WirePlan[] | null;
  error?: WireError | null;
}

export interface CatalogModel {
  name: string;
  num_layers: number;
  hidden_size: number;
  num_heads: number;
  num_kv_heads: number;
  ffn_size: number;
  vocab_size: number;
  weight_bytes: number;
  kv_bytes: number;
  param_count: number;
}
