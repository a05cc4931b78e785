#!/usr/bin/env python3
"""Enumerate every (dp, tp) placement of a fixed workload on a small
fleet and print the per-phase time decomposition, showing where tensor
parallelism starts to lose to its own synchronization traffic.

Example:
    python scripts/parallelism_tradeoffs.py --gpus 4 --batch 16
"""

import argparse

from inferplan import (
    MemoryBudget,
    WorkloadSpec,
    default_catalog,
    generate_task_list,
    get_configurations,
    model_weight_bytes,
    rank_configs,
    simulate_hybrid,
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--model", default="llama-2-7b")
    parser.add_argument("--gpu", default="a100-80g")
    parser.add_argument("--gpus", type=int, default=4, help="fleet size")
    parser.add_argument("--batch", type=int, default=16)
    parser.add_argument("--prompt-len", type=int, default=1024)
    parser.add_argument("--output-len", type=int, default=128)
    args = parser.parse_args()

    catalog = default_catalog()
    m = catalog.model(args.model)
    g = catalog.gpu(args.gpu)
    budget = MemoryBudget.from_capacity(g.memory_capacity, model_weight_bytes(m))
    w = WorkloadSpec(args.batch, args.prompt_len, args.output_len)
    tasks = generate_task_list(m, w, budget)

    results = [simulate_hybrid(tasks, cfg, g, fleet_size=args.gpus)
               for cfg in get_configurations(args.gpus)]
    print(f"model={args.model} gpu={args.gpu} fleet={args.gpus} "
          f"batch={args.batch} prompt={args.prompt_len} output={args.output_len}")
    print(f"{'dp':>3} {'tp':>3}  {'prefill_s':>10} {'decode_s':>10} {'total_s':>10} "
          f"{'prefill_comm_s':>15} {'prefill_bound':<14} {'decode_bound':<14}")
    for r in rank_configs(results, k=len(results)):
        print(f"{r.config.dp:>3} {r.config.tp:>3}  {r.prefill.seconds:>10.4f} "
              f"{r.decode.seconds:>10.4f} {r.total_time:>10.4f} "
              f"{r.prefill.comm_seconds:>15.6f} "
              f"{r.prefill.bottleneck.value:<14} {r.decode.bottleneck.value:<14}")


if __name__ == "__main__":
    main()
