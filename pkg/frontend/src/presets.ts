/** Documented numeric values behind the form's preset options. */

export const SEQ_LEN_PRESETS = {
  short: 128,
  medium: 512,
  long: 1024,
} as const;

export type SeqLenPreset = keyof typeof SEQ_LEN_PRESETS | 'custom';

/** Throughput requirement maps to the request's throughput_floor. */
export const THROUGHPUT_PRESETS = {
  none: null,
  standard: 100,
  high: 1000,
} as const;

export type ThroughputPreset = keyof typeof THROUGHPUT_PRESETS | 'custom';

/**
 * Latency preference choices. Picking a latency-oriented option sets
 * objective=min_latency ('custom' also imposes a latency ceiling in
 * seconds); 'throughput_first' flips the objective instead.
 */
export type LatencyPreset = 'latency_first' | 'throughput_first' | 'custom';

export const DEFAULT_OUTPUT_LEN = 256;
export const DEFAULT_BATCH_SIZE = 1;
