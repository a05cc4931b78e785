/** Form state, field validation and mapping onto the wire request.
 * Validation mirrors the server's rules so a form that submits cannot
 * be rejected with a 422. */

import {
  LatencyPreset,
  SEQ_LEN_PRESETS,
  SeqLenPreset,
  THROUGHPUT_PRESETS,
  ThroughputPreset,
} from './presets.js';
import { wireRequestSchema } from './schema.js';
import { PrecisionChoice, WireRequest } from './types.js';

export interface FormState {
  model: string;
  budget: string;
  seqLenPreset: SeqLenPreset;
  seqLenCustom: string;
  outputLen: string;
  batchSize: string;
  throughputPreset: ThroughputPreset;
  throughputCustom: string;
  latencyPreset: LatencyPreset;
  latencyCustom: string;
  precisionTolerance: PrecisionChoice;
}

export function emptyForm(): FormState {
  return {
    model: '',
    budget: '',
    seqLenPreset: 'medium',
    seqLenCustom: '',
    outputLen: '256',
    batchSize: '1',
    throughputPreset: 'none',
    throughputCustom: '',
    latencyPreset: 'latency_first',
    latencyCustom: '',
    precisionTolerance: 'strict',
  };
}

export type FieldErrors = Partial<Record<keyof FormState, string>>;

function parsePositiveNumber(raw: string): number | null {
  const value = Number(raw.trim());
  return Number.isFinite(value) && value > 0 ? value : null;
}

function parsePositiveInt(raw: string): number | null {
  const value = parsePositiveNumber(raw);
  return value !== null && Number.isInteger(value) ? value : null;
}

/** Field-level problems; an empty object means the form may submit. */
export function validateForm(form: FormState): FieldErrors {
  const errors: FieldErrors = {};
  if (!form.model) {
    errors.model = 'select a model';
  }
  if (parsePositiveNumber(form.budget) === null) {
    errors.budget = 'budget must be a positive number';
  }
  if (form.seqLenPreset === 'custom' && parsePositiveInt(form.seqLenCustom) === null) {
    errors.seqLenCustom = 'sequence length must be a positive integer';
  }
  if (parsePositiveInt(form.outputLen) === null) {
    errors.outputLen = 'output length must be a positive integer';
  }
  if (parsePositiveInt(form.batchSize) === null) {
    errors.batchSize = 'batch size must be a positive integer';
  }
  if (form.throughputPreset === 'custom' && parsePositiveNumber(form.throughputCustom) === null) {
    errors.throughputCustom = 'throughput requirement must be a positive number';
  }
  if (form.latencyPreset === 'custom' && parsePositiveNumber(form.latencyCustom) === null) {
    errors.latencyCustom = 'latency ceiling must be a positive number of seconds';
  }
  return errors;
}

export function canSubmit(form: FormState): boolean {
  return Object.keys(validateForm(form)).length === 0;
}

/** Expand presets and map the form field-for-field onto the request.
 * Throws if called on an invalid form (submit must stay disabled). */
export function buildRequest(form: FormState): WireRequest {
  const errors = validateForm(form);
  if (Object.keys(errors).length > 0) {
    throw new Error(`form is not submittable: ${Object.values(errors).join('; ')}`);
  }
  const promptLen =
    form.seqLenPreset === 'custom'
      ? (parsePositiveInt(form.seqLenCustom) as number)
      : SEQ_LEN_PRESETS[form.seqLenPreset];
  const throughputFloor =
    form.throughputPreset === 'custom'
      ? (parsePositiveNumber(form.throughputCustom) as number)
      : THROUGHPUT_PRESETS[form.throughputPreset];

  const request: WireRequest = {
    model: form.model,
    budget: parsePositiveNumber(form.budget) as number,
    prompt_len: promptLen,
    output_len: parsePositiveInt(form.outputLen) as number,
    batch_size: parsePositiveInt(form.batchSize) as number,
    objective: form.latencyPreset === 'throughput_first' ? 'max_throughput' : 'min_latency',
    throughput_floor: throughputFloor,
    latency_ceiling:
      form.latencyPreset === 'custom'
        ? (parsePositiveNumber(form.latencyCustom) as number)
        : null,
    precision_tolerance: form.precisionTolerance,
    framework: 'search',
  };
  return wireRequestSchema.parse(request);
}
