#!/usr/bin/env python3
"""Sweep batch size for one model/GPU pair and compare the two serving
disciplines side by side: batch latency, TTFT and decode throughput.

Example:
    python scripts/sweep_batch_latency.py --model llama-2-7b --gpu rtx-4090
"""

import argparse

from inferplan import (
    Framework,
    MemoryBudget,
    ParallelConfig,
    WorkloadSpec,
    default_catalog,
    generate_task_list,
    model_weight_bytes,
    simulate_hybrid,
    single_gpu_throughput,
    tpot,
    ttft,
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--model", default="llama-2-7b")
    parser.add_argument("--gpu", default="a100-80g")
    parser.add_argument("--prompt-len", type=int, default=512)
    parser.add_argument("--output-len", type=int, default=256)
    parser.add_argument("--batches", type=int, nargs="+",
                        default=[1, 2, 4, 8, 16, 32, 64])
    args = parser.parse_args()

    catalog = default_catalog()
    m = catalog.model(args.model)
    g = catalog.gpu(args.gpu)
    budget = MemoryBudget.from_capacity(g.memory_capacity, model_weight_bytes(m))

    print(f"model={args.model} gpu={args.gpu} "
          f"prompt={args.prompt_len} output={args.output_len}")
    print(f"{'batch':>5}  {'framework':<13} {'ttft_s':>9} {'tpot_ms':>9} "
          f"{'latency_s':>10} {'decode_tok/s':>13}")
    for batch in args.batches:
        for framework in Framework:
            w = WorkloadSpec(batch, args.prompt_len, args.output_len, framework)
            tasks = generate_task_list(m, w, budget)
            sim = simulate_hybrid(tasks, ParallelConfig(1, 1), g)
            t = tpot(sim, args.output_len)
            print(f"{batch:>5}  {framework.value:<13} {ttft(sim):>9.4f} "
                  f"{t * 1e3:>9.3f} {sim.total_time:>10.3f} "
                  f"{batch * single_gpu_throughput(t):>13.1f}")


if __name__ == "__main__":
    main()
