/** Client-side validation mirroring the server's wire schema. The
 * vitest suite additionally checks built requests against the JSON
 * schema exported from the server, so the two cannot drift silently. */

import { z } from 'zod';

export const wireRequestSchema = z
  .object({
    model: z.string().min(1),
    budget: z.number().positive(),
    prompt_len: z.number().int().min(1),
    output_len: z.number().int().min(1),
    batch_size: z.number().int().min(1),
    objective: z.enum(['min_latency', 'max_throughput']),
    throughput_floor: z.number().positive().nullable(),
    latency_ceiling: z.number().positive().nullable(),
    precision_tolerance: z.enum(['strict', 'relaxed']),
    framework: z.enum(['dyn_batching', 'split_fuse', 'search']),
  })
  .strict();

const metricsSchema = z.object({
  ttft: z.number(),
  tpot: z.number(),
  batch_latency: z.number(),
  throughput: z.number(),
  memory_per_gpu: z.number(),
});

const planSchema = z.object({
  gpu: z.string(),
  gpu_count: z.number().int(),
  dp: z.number().int(),
  tp: z.number().int(),
  framework: z.enum(['dyn_batching', 'split_fuse']),
  optimizations: z.object({
    flash_attention: z.boolean(),
    h2o: z.boolean(),
    h2o_keep_ratio: z.number(),
  }),
  adjusted_batch: z.number().int(),
  adjusted_seq: z.number().int(),
  metrics: metricsSchema,
  cost: z.number(),
});

export const wireResponseSchema = z.object({
  plans: z.array(planSchema).nullish(),
  error: z
    .object({
      code: z.string(),
      message: z.string(),
      binding_constraint: z.string().nullish(),
    })
    .nullish(),
});

export const catalogModelSchema = z.object({
  name: z.string(),
  num_layers: z.number().int(),
  hidden_size: z.number().int(),
  num_heads: z.number().int(),
  num_kv_heads: z.number().int(),
  ffn_size: z.number().int(),
  vocab_size: z.number().int(),
  weight_bytes: z.number().int(),
  kv_bytes: z.number().int(),
  param_count: z.number(),
});
